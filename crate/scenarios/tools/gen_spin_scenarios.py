"""Generate the spin-1/2 scenario files (spin-octa.scn, qubit-tetra.scn).

Total-parameter points are the 8 cube vertices, labelled by sign pattern.
The group is the rotation group of the cube (order 24), presented by a
quarter turn about the third axis and a third turn about the (1,1,1) axis.
A rotation R acts on points to the right as phi -> R^T phi, so that the
right action composes as R_{gh} = R_g R_h.  The explicit representation
sends R to its SU(2) lift exp(-i theta/2 n.sigma), written in a frame where
the base experiment's direction is the third axis.
"""
import itertools
import sys

import numpy as np

SIGNS = [np.array(s) for s in itertools.product([1, -1], repeat=3)]


def label(s):
    return "".join("+" if x > 0 else "-" for x in s)


def axis_angle(axis, theta):
    n = np.asarray(axis, float)
    n = n / np.linalg.norm(n)
    k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return np.eye(3) + np.sin(theta) * k + (1 - np.cos(theta)) * k @ k


def su2(axis, theta):
    n = np.asarray(axis, float)
    n = n / np.linalg.norm(n)
    sx = np.array([[0, 1], [1, 0]], complex)
    sy = np.array([[0, -1j], [1j, 0]], complex)
    sz = np.array([[1, 0], [0, -1]], complex)
    ns = n[0] * sx + n[1] * sy + n[2] * sz
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * ns


def frame_to_z(d):
    """Rotation Q with Q d = e_z."""
    d = np.asarray(d, float) / np.linalg.norm(d)
    z = np.array([0.0, 0.0, 1.0])
    v = np.cross(d, z)
    s = np.linalg.norm(v)
    if s < 1e-15:
        return np.eye(3)
    return axis_angle(v, np.arctan2(s, d @ z))


def cycles(perm, labels):
    seen = set()
    out = []
    for i in range(len(perm)):
        if i in seen or perm[i] == i:
            continue
        c = []
        j = i
        while j not in seen:
            seen.add(j)
            c.append(labels[j])
            j = perm[j]
        out.append("(" + " ".join(c) + ")")
    return "".join(out) if out else "()"


def fmt_c(z):
    re, im = z.real, z.imag
    if abs(re) < 1e-15:
        re = 0.0
    if abs(im) < 1e-15:
        im = 0.0
    return f"{re:.17g}{'+' if im >= 0 else '-'}{abs(im):.17g}i"


def emit(name, base_dir, experiments, comment):
    labels = [label(s) for s in SIGNS]
    q = frame_to_z(base_dir)
    gens = [("quarter", [0, 0, 1], np.pi / 2), ("third", [1, 1, 1], 2 * np.pi / 3)]
    lines = [f"# {comment}", "# Generated by scenarios/tools/gen_spin_scenarios.py", ""]
    lines += ["[options]", f"name = {name}", f"base = {experiments[0][0]}", ""]
    lines.append("[phi]")
    lines += labels
    lines += ["", "[generators]"]
    for gname, axis, theta in gens:
        r = axis_angle(axis, theta)
        perm = []
        for s in SIGNS:
            img = np.rint(r.T @ s).astype(int)
            perm.append(labels.index(label(img)))
        lines.append(f"{gname} = {cycles(perm, labels)}")
    for ename, d in experiments:
        d = np.asarray(d, float)
        lines += ["", f"[parameter {ename}]", "values = +1 -1", "eigenvalues = 1 -1"]
        for s, l in zip(SIGNS, labels):
            lines.append(f"{l} -> {'+1' if s @ d > 0 else '-1'}")
    lines += ["", "[explicit_rep]", "dimension = 2", "projective = true"]
    for gname, axis, theta in gens:
        u = su2(q @ np.asarray(axis, float), theta)
        lines.append(f"generator = {gname}")
        for row in u:
            lines.append("row = " + " ".join(fmt_c(z) for z in row))
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    octa = emit(
        "spin-octa",
        [0, 0, 1],
        [("z", [0, 0, 1]), ("x", [1, 0, 0]), ("y", [0, 1, 0])],
        "Spin-1/2 along the three coordinate axes, cube rotation group.",
    )
    tetra = emit(
        "qubit-tetra",
        [1, 1, 1],
        [("A", [1, 1, 1]), ("B", [1, -1, -1]), ("C", [-1, 1, -1]), ("D", [-1, -1, 1])],
        "Four +/-1 experiments along tetrahedral directions (pairwise cosine -1/3).",
    )
    open(f"{out}/spin-octa.scn", "w").write(octa)
    open(f"{out}/qubit-tetra.scn", "w").write(tetra)
