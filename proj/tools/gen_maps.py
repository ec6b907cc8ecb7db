#!/usr/bin/env python3
"""Generates the built-in lane-graph maps under maps/.

The JSON files are checked in; rerun this script only when a map layout
changes. Right-hand traffic, x east, y north, lane width 3.5 m.
"""
import json
import math
import os
import sys

W = 3.5
O = W / 2.0


def r2(v):
    return round(v, 6)


def pts(seq):
    out = []
    for x, y in seq:
        p = [r2(x), r2(y)]
        if not out or (abs(p[0] - out[-1][0]) > 1e-6 or abs(p[1] - out[-1][1]) > 1e-6):
            out.append(p)
    return out


def arc(cx, cy, r, a0, a1, step_deg=7.5):
    n = max(2, int(math.ceil(abs(math.degrees(a1 - a0)) / step_deg)))
    return [(cx + r * math.cos(a0 + (a1 - a0) * i / n), cy + r * math.sin(a0 + (a1 - a0) * i / n))
            for i in range(n + 1)]


def bezier(p0, p1, p2, p3, n=16):
    out = []
    for i in range(n + 1):
        t = i / n
        a = (1 - t) ** 3
        b = 3 * (1 - t) ** 2 * t
        c = 3 * (1 - t) * t ** 2
        d = t ** 3
        out.append((a * p0[0] + b * p1[0] + c * p2[0] + d * p3[0],
                    a * p0[1] + b * p1[1] + c * p2[1] + d * p3[1]))
    return out


def lane(lid, centerline, successors=(), left=None, right=None, width=W):
    return {"id": lid, "width": width, "centerline": pts(centerline),
            "successors": list(successors), "left": left, "right": right}


def rot(p, k):
    """Rotate by k quarter turns counter-clockwise."""
    x, y = p
    for _ in range(k % 4):
        x, y = -y, x
    return (x, y)


ARMS = ["s", "e", "n", "w"]  # quarter-turn index 0..3


def intersection(arm_len=60.0, half=7.0):
    lanes = []
    for k, a in enumerate(ARMS):
        right_out = ARMS[(k + 1) % 4]
        straight_out = ARMS[(k + 2) % 4]
        left_out = ARMS[(k + 3) % 4]
        inc = [rot((O, -arm_len), k), rot((O, -half), k)]
        out = [rot((-O, -half), k), rot((-O, -arm_len), k)]
        lanes.append(lane(f"{a}_in", inc, [f"{a}_left", f"{a}_right", f"{a}_straight"]))
        lanes.append(lane(f"{a}_out", out))
        straight = [rot((O, -half), k), rot((O, half), k)]
        right = [rot(p, k) for p in arc(half, -half, half - O, math.pi, math.pi / 2)]
        left = [rot(p, k) for p in arc(-half, -half, half + O, 0.0, math.pi / 2)]
        lanes.append(lane(f"{a}_straight", straight, [f"{straight_out}_out"]))
        lanes.append(lane(f"{a}_right", right, [f"{right_out}_out"]))
        lanes.append(lane(f"{a}_left", left, [f"{left_out}_out"]))
    return lanes


def intersection_signals(kind, arm_len=60.0, half=7.0):
    sigs = []
    s = arm_len - half - 1.0
    for k, a in enumerate(ARMS):
        sig = {"id": f"{a}_{'light' if kind == 'traffic_light' else 'stop'}", "kind": kind,
               "lane": f"{a}_in", "s": s}
        if kind == "traffic_light":
            sig["phase"] = [10.0, 3.0, 13.0]
            # north-south approaches start red, east-west start green
            sig["offset"] = 13.0 if a in ("s", "n") else 0.0
        sigs.append(sig)
    return sigs


def straight_road(n_lanes, length, prefix="lane"):
    lanes = []
    for i in range(n_lanes):
        y = i * W
        lanes.append(lane(f"{prefix}_{i}", [(0.0, y), (length, y)], [],
                          left=f"{prefix}_{i + 1}" if i + 1 < n_lanes else None,
                          right=f"{prefix}_{i - 1}" if i > 0 else None))
    return lanes


def lane_merge():
    lanes = [
        lane("main_a", [(-100.0, 0.0), (0.0, 0.0)], ["main_b"], left="main_a_left"),
        lane("main_a_left", [(-100.0, W), (0.0, W)], ["main_b_left"], right="main_a"),
        lane("main_b", [(0.0, 0.0), (120.0, 0.0)], [], left="main_b_left"),
        lane("main_b_left", [(0.0, W), (120.0, W)], [], right="main_b"),
        lane("ramp_a", [(-90.0, -14.0), (-60.0, -14.0)], ["ramp_b"]),
        lane("ramp_b", bezier((-60.0, -14.0), (-35.0, -14.0), (-30.0, 0.0), (0.0, 0.0), 20), ["main_b"]),
    ]
    return lanes


def roundabout(radius=20.0, arm_len=90.0, approach=32.0):
    lanes = []
    off = math.radians(15.0)
    key = []  # (angle, kind, arm)
    for k, a in enumerate(ARMS):
        phi = -math.pi / 2 + k * math.pi / 2
        key.append((phi - off, "exit", a))
        key.append((phi + off, "entry", a))
    ring_names = []
    for i in range(len(key)):
        a0, kind0, arm0 = key[i]
        a1, kind1, arm1 = key[(i + 1) % len(key)]
        if a1 <= a0:
            a1 += 2 * math.pi
        ring_names.append(f"ring_{kind0}_{arm0}")
    for i in range(len(key)):
        a0, kind0, arm0 = key[i]
        a1, kind1, arm1 = key[(i + 1) % len(key)]
        if a1 <= a0:
            a1 += 2 * math.pi
        succ = [ring_names[(i + 1) % len(key)]]
        if kind1 == "exit":
            succ = [f"{arm1}_exit"] + succ
        lanes.append(lane(ring_names[i], arc(0.0, 0.0, radius, a0, a1, 5.0), succ))
    for k, a in enumerate(ARMS):
        phi = -math.pi / 2 + k * math.pi / 2
        ent = phi + off
        ext = phi - off
        inc_end = rot((O, -approach), k)
        inc = [rot((O, -arm_len), k), inc_end]
        ring_in = (radius * math.cos(ent), radius * math.sin(ent))
        tan_in = (-math.sin(ent), math.cos(ent))
        heading_in = rot((0.0, 1.0), k)
        c = 5.0
        entry = bezier(inc_end, (inc_end[0] + c * heading_in[0], inc_end[1] + c * heading_in[1]),
                       (ring_in[0] - c * tan_in[0], ring_in[1] - c * tan_in[1]), ring_in)
        ring_out = (radius * math.cos(ext), radius * math.sin(ext))
        tan_out = (-math.sin(ext), math.cos(ext))
        out_start = rot((-O, -approach), k)
        heading_out = rot((0.0, -1.0), k)
        exit_ = bezier(ring_out, (ring_out[0] + c * tan_out[0], ring_out[1] + c * tan_out[1]),
                       (out_start[0] - c * heading_out[0], out_start[1] - c * heading_out[1]), out_start)
        lanes.append(lane(f"{a}_in", inc, [f"{a}_entry"]))
        lanes.append(lane(f"{a}_entry", entry, [f"ring_entry_{a}"]))
        lanes.append(lane(f"{a}_exit", exit_, [f"{a}_out"]))
        lanes.append(lane(f"{a}_out", [out_start, rot((-O, -arm_len), k)]))
    return lanes


def navigation_loop():
    # Counter-clockwise one-way loop with a northbound shortcut through the middle.
    r = 10.0
    lanes = [
        lane("bottom_w", [(-50.0, -40.0), (0.0, -40.0)], ["bottom_e", "mid_in"]),
        lane("bottom_e", [(0.0, -40.0), (50.0, -40.0)], ["corner_se"]),
        lane("corner_se", arc(50.0, -30.0, r, -math.pi / 2, 0.0), ["right"]),
        lane("right", [(60.0, -30.0), (60.0, 30.0)], ["corner_ne"]),
        lane("corner_ne", arc(50.0, 30.0, r, 0.0, math.pi / 2), ["top_e"]),
        lane("top_e", [(50.0, 40.0), (0.0, 40.0)], ["top_w"]),
        lane("top_w", [(0.0, 40.0), (-50.0, 40.0)], ["corner_nw"]),
        lane("corner_nw", arc(-50.0, 30.0, r, math.pi / 2, math.pi), ["left"]),
        lane("left", [(-60.0, 30.0), (-60.0, -30.0)], ["corner_sw"]),
        lane("corner_sw", arc(-50.0, -30.0, r, math.pi, 1.5 * math.pi), ["bottom_w"]),
        lane("mid_in", arc(0.0, -32.0, 8.0, -math.pi / 2, 0.0), ["mid"]),
        lane("mid", [(8.0, -32.0), (8.0, 32.0)], ["mid_out"]),
        lane("mid_out", arc(0.0, 32.0, 8.0, 0.0, math.pi / 2), ["top_w"]),
    ]
    return lanes


def write(path, lanes, signals=()):
    doc = {"lanes": lanes, "signals": list(signals)}
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "maps")
    os.makedirs(out, exist_ok=True)
    write(os.path.join(out, "intersection.map.json"), intersection())
    write(os.path.join(out, "intersection_lights.map.json"), intersection(),
          intersection_signals("traffic_light"))
    write(os.path.join(out, "intersection_stop.map.json"), intersection(),
          intersection_signals("stop_sign"))
    write(os.path.join(out, "lane_merge.map.json"), lane_merge())
    write(os.path.join(out, "overtake.map.json"), straight_road(2, 200.0))
    write(os.path.join(out, "four_lane.map.json"), straight_road(4, 250.0))
    write(os.path.join(out, "roundabout.map.json"), roundabout())
    write(os.path.join(out, "navigation.map.json"), navigation_loop())


if __name__ == "__main__":
    main()
