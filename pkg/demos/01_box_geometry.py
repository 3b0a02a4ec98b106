#!/usr/bin/env python3
"""Box geometry walkthrough: IoU, minimal rectangles, unions.

Everything downstream (region generation, localization scoring) reduces to
these few operations, so this is the place to build intuition.
"""

from partkit.geometry import Box, iou, iou_vs_union, minimal_rect, union_area

a = Box(0.0, 0.0, 10.0, 10.0)
b = Box(5.0, 5.0, 15.0, 15.0)
print(f"a = {a}")
print(f"b = {b}")
print(f"areas: {a.area}, {b.area}")
print(f"iou(a, b) = {iou(a, b):.6f}  (25 overlap / 175 union = 1/7)")
print(f"iou(a, a) = {iou(a, a)}  (identity is exact)")

# minimal rectangle around a keypoint cluster
points = [(12.0, 30.0), (40.0, 18.0), (25.0, 44.0)]
rect = minimal_rect(points)
print(f"\nminimal_rect({points})")
print(f"  = {rect}  ({rect.width:g} x {rect.height:g})")

# union area uses inclusion-exclusion, so overlaps are not double counted
boxes = [Box(0, 0, 10, 10), Box(5, 5, 15, 15), Box(20, 0, 30, 10)]
print(f"\nunion_area of three boxes = {union_area(boxes):g}")
print("sum of areas would be", sum(box.area for box in boxes))

# the redundancy score: one candidate against the union of fixed regions
candidate = Box(10.0, 10.0, 30.0, 30.0)
fixed = [Box(0.0, 0.0, 20.0, 20.0)]
print(f"\niou_vs_union(candidate, fixed) = {iou_vs_union(candidate, fixed):.6f}")
