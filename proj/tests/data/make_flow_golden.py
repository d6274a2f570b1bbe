"""Regenerates the affine flow golden case.

The source frame carries keypoint A p + b with Jacobian A and the driving frame
carries p with the identity, so the exact backward flow is z -> A z + b. The
golden PFM stores that map at 64x64 pixel centers as float32, evaluated as
(A p + b) + A (z - p).
"""
import json
import struct

A = [[0.9, 0.1], [-0.05, 1.1]]
B = [0.05, -0.02]
P = [0.1, 0.2]
N = 64


def apply(m, v):
    return [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]


src = apply(A, P)
src = [src[0] + B[0], src[1] + B[1]]


def center(i):
    return -1.0 + (2.0 * i + 1.0) / N


rows = []
for j in range(N):
    row = []
    for i in range(N):
        d = [center(i) - P[0], center(j) - P[1]]
        ad = apply(A, d)
        row += [src[0] + ad[0], src[1] + ad[1]]
    rows.append(row)

with open("flow_affine_golden.pfm", "wb") as f:
    f.write(b"PF2\n%d %d\n-1.0\n" % (N, N))
    for row in reversed(rows):
        f.write(struct.pack("<%df" % len(row), *row))

with open("flow_affine_src.json", "w") as f:
    json.dump({"keypoints": [{"p": src, "jac": A}]}, f, indent=2)
    f.write("\n")
with open("flow_affine_drv.json", "w") as f:
    json.dump({"keypoints": [{"p": P, "jac": [[1.0, 0.0], [0.0, 1.0]]}]}, f, indent=2)
    f.write("\n")
