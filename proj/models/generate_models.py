#!/usr/bin/env python3
"""Regenerates the example model files (beam60, arch, tower).

Deterministic output; run from the repository root:
    python3 models/generate_models.py
"""
import json
import math
import os

OUT = os.path.dirname(os.path.abspath(__file__))


def write(name, doc):
    path = os.path.join(OUT, name)
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")
    print("wrote", path)


def beam60():
    n_el = 60
    length = 6.0
    nodes = [{"id": i, "x": round(i * length / n_el, 12), "y": 0.0}
             for i in range(n_el + 1)]
    elements = [{"id": i, "type": "beam", "nodes": [i, i + 1],
                 "material": 1, "section": 1} for i in range(n_el)]
    doc = {
        "name": "beam60",
        "nodes": nodes,
        "materials": [{"id": 1, "model": "masonry", "young": 3.0e9,
                       "poisson": 0.2, "density": 1800.0}],
        "sections": [{"id": 1, "type": "rect_fiber", "width": 1.0,
                      "height": 0.4, "fibers": 20, "gauss_points": 3}],
        "elements": elements,
        "constraints": {
            "fixed": [{"node": 0, "dofs": ["ux", "uy"]},
                      {"node": n_el, "dofs": ["uy"]}]
        },
        "load_cases": [
            {
                # axial precompression, then a uniform lateral load staged
                # 9000 -> 15750 N total (q = W / 6 m)
                "name": "table",
                "steps": [
                    {"increments": 1,
                     "nodal": [{"node": n_el, "fx": -1.0e5}]},
                    {"increments": 1,
                     "line": [{"elements": "all", "qy": -1500.0}]},
                    {"increments": 6,
                     "line": [{"elements": "all", "qy": -1125.0}]},
                ],
            },
            {
                "name": "oneshot",
                "steps": [
                    {"increments": 1,
                     "nodal": [{"node": n_el, "fx": -1.0e5}]},
                    {"increments": 1,
                     "line": [{"elements": "all", "qy": -2625.0}]},
                ],
            },
        ],
    }
    write("beam60.json", doc)


def arch():
    # circular arch (span 6 m, mean radius 3.75 m, 0.25 x 1 m section) on two
    # piers (0.8 x 1 m, ~4 m), steel tie rod between the springing sections
    r_mean = 3.75
    t_arch = 0.25
    half_angle = math.asin(3.0 / r_mean)
    yc = 4.0 - 0.6 * r_mean  # springing (mean radius) at y = 4, crown at 5.5
    # one element through the thickness: like the thick-shell original, the
    # section cannot split into separate load-bearing rings
    n_r = 1
    radii = [r_mean - t_arch / 2 + t_arch * k / n_r for k in range(n_r + 1)]
    n_arc = 64

    nodes = []
    node_id = [0]
    index = {}

    def add_node(x, y):
        key = (round(x, 9), round(y, 9))
        if key in index:
            return index[key]
        nid = node_id[0]
        node_id[0] += 1
        index[key] = nid
        nodes.append({"id": nid, "x": key[0], "y": key[1]})
        return nid

    # arch grid: theta from -half_angle (left springing) to +half_angle
    arch_grid = {}
    for it in range(n_arc + 1):
        theta = -half_angle + 2 * half_angle * it / n_arc
        for ir, r in enumerate(radii):
            x = r * math.sin(theta)
            y = yc + r * math.cos(theta)
            arch_grid[(it, ir)] = add_node(x, y)

    elements = []
    eid = [0]

    def add_quad(n0, n1, n2, n3, material, section):
        elements.append({"id": eid[0], "type": "quad",
                         "nodes": [n0, n1, n2, n3],
                         "material": material, "section": section})
        eid[0] += 1

    for it in range(n_arc):
        for ir in range(n_r):
            add_quad(arch_grid[(it, ir)], arch_grid[(it + 1, ir)],
                     arch_grid[(it + 1, ir + 1)], arch_grid[(it, ir + 1)], 1, 1)

    # piers: columns pass through the arch springing-section nodes and the
    # inner pier face is flush with the intrados, so the springing bears
    # fully on the pier; the top row follows the (radial) springing line
    # y = yc + 0.75 |x|
    spring_x = [r * math.sin(half_angle) for r in radii]  # 2.9, 3.1
    pier_cols = spring_x + [spring_x[-1] + 0.3, spring_x[-1] + 0.6]
    n_rows = 12

    def pier(sign):
        grid = {}
        for ic, xc in enumerate(pier_cols):
            x = sign * xc
            y_top = yc + 0.75 * xc
            for iy in range(n_rows + 1):
                grid[(ic, iy)] = add_node(x, y_top * iy / n_rows)
        for ic in range(len(pier_cols) - 1):
            for iy in range(n_rows):
                a = grid[(ic, iy)]
                b = grid[(ic + 1, iy)]
                c = grid[(ic + 1, iy + 1)]
                d = grid[(ic, iy + 1)]
                if sign > 0:
                    add_quad(a, b, c, d, 1, 1)
                else:
                    add_quad(b, a, d, c, 1, 1)  # keep ccw winding when mirrored
        return grid

    right = pier(1)
    left = pier(-1)

    # tie rod between the springing sections (two 3x3 cm rods -> one bar)
    tie_left = arch_grid[(0, 1)]
    tie_right = arch_grid[(n_arc, 1)]
    elements.append({"id": eid[0], "type": "truss", "nodes": [tie_left, tie_right],
                     "material": 2, "section": 2})
    eid[0] += 1

    fixed = []
    for ic in range(len(pier_cols)):
        fixed.append({"node": right[(ic, 0)], "dofs": ["ux", "uy"]})
        fixed.append({"node": left[(ic, 0)], "dofs": ["ux", "uy"]})

    doc = {
        "name": "arch",
        "nodes": nodes,
        "materials": [
            {"id": 1, "model": "masonry", "young": 3.0e9, "poisson": 0.2,
             "density": 1800.0},
            {"id": 2, "model": "linear", "young": 2.1e11, "poisson": 0.3,
             "density": 7850.0},
        ],
        "sections": [
            {"id": 1, "type": "solid", "thickness": 1.0},
            {"id": 2, "type": "bar", "area": 1.8e-3},
        ],
        "elements": elements,
        "constraints": {"fixed": fixed},
        "load_cases": [
            {"name": "selfweight",
             "steps": [{"increments": 2, "self_weight": True}]}
        ],
    }
    write("arch.json", doc)

    # sweep positions: span fractions i/14 from the left springing, loads on
    # the extrados
    r_out = radii[-1]
    pos = []
    for i in range(1, 8):
        x = -3.0 + 6.0 * i / 14.0
        y = yc + math.sqrt(r_out * r_out - x * x)
        pos.append("%.4f:%.4f" % (x, y))
    print("arch sweep positions:", ",".join(pos))


def tower():
    # synthetic cantilever: 1 x 6 m masonry wall capped by an overhanging linear-elastic slab at
    # the top, so self-weight alone cracks the wall
    dx = 0.25
    nodes = []
    node_id = [0]
    index = {}

    def add_node(x, y):
        key = (round(x, 9), round(y, 9))
        if key in index:
            return index[key]
        nid = node_id[0]
        node_id[0] += 1
        index[key] = nid
        nodes.append({"id": nid, "x": key[0], "y": key[1]})
        return nid

    elements = []
    eid = [0]

    def add_quad_cell(x0, y0, material):
        a = add_node(x0, y0)
        b = add_node(x0 + dx, y0)
        c = add_node(x0 + dx, y0 + dx)
        d = add_node(x0, y0 + dx)
        elements.append({"id": eid[0], "type": "quad", "nodes": [a, b, c, d],
                         "material": material, "section": 1})
        eid[0] += 1

    for iy in range(22):          # masonry wall 1 x 5.5
        for ix in range(4):
            add_quad_cell(ix * dx, iy * dx, 1)
    for iy in range(22, 24):      # stiff slab bearing on top, 0.75 m overhang
        for ix in range(7):
            add_quad_cell(ix * dx, iy * dx, 2)

    fixed = [{"node": index[(round(ix * dx, 9), 0.0)], "dofs": ["ux", "uy"]}
             for ix in range(5)]

    doc = {
        "name": "tower",
        "nodes": nodes,
        "materials": [
            {"id": 1, "model": "masonry", "young": 4.0e9, "poisson": 0.2,
             "density": 2000.0},
            {"id": 2, "model": "linear", "young": 1.0e10, "poisson": 0.2,
             "density": 2500.0},
        ],
        "sections": [{"id": 1, "type": "solid", "thickness": 1.0}],
        "elements": elements,
        "constraints": {"fixed": fixed},
        "load_cases": [
            {"name": "selfweight",
             "steps": [{"increments": 2, "self_weight": True}]}
        ],
    }
    write("tower.json", doc)


if __name__ == "__main__":
    beam60()
    arch()
    tower()
