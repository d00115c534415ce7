#!/usr/bin/env python3
"""Generates the bundled benchmark data under crates/core/data.

Meshes are closed proxies (boxes, cylinders, ellipsoids) with the dimensions
of the YCB objects. Logs and cached grasp-quality values describe a reference
run of a three-finger hand. Output is deterministic.

    python3 tools/gen_fixtures.py
"""

import math
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"

BOARD_W, BOARD_H = 0.594, 0.420
COLS, ROWS = 3, 2
CELL_W, CELL_H = BOARD_W / COLS, BOARD_H / ROWS


def num(v):
    """Shortest representation, matching the engine's writer."""
    if v == 0:
        return "0"
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def rot_z(t):
    c, s = math.cos(t), math.sin(t)
    return [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]


def rot_x(t):
    c, s = math.cos(t), math.sin(t)
    return [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def pose(r, p):
    vals = []
    for i in range(3):
        vals += [r[i][0], r[i][1], r[i][2], p[i]]
    vals += [0.0, 0.0, 0.0, 1.0]
    return " ".join(num(round(v, 12) + 0.0) for v in vals)


# ---------------------------------------------------------------- meshes


def off(vertices, faces):
    lines = ["OFF", f"{len(vertices)} {len(faces)} 0"]
    lines += [" ".join(f"{c:.6f}" for c in v) for v in vertices]
    lines += [f"{len(f)} " + " ".join(str(i) for i in f) for f in faces]
    return "\n".join(lines) + "\n"


def box_mesh(sx, sy, sz, k):
    """Box on the plane z = 0, each face split into k x k quads."""
    index = {}
    verts = []

    def vid(i, j, l):
        key = (i, j, l)
        if key not in index:
            index[key] = len(verts)
            verts.append((sx * (i / k - 0.5), sy * (j / k - 0.5), sz * l / k))
        return index[key]

    faces = []
    for a in range(k):
        for b in range(k):
            # -z and +z
            faces.append([vid(a, b, 0), vid(a, b + 1, 0), vid(a + 1, b + 1, 0), vid(a + 1, b, 0)])
            faces.append([vid(a, b, k), vid(a + 1, b, k), vid(a + 1, b + 1, k), vid(a, b + 1, k)])
            # -y and +y
            faces.append([vid(a, 0, b), vid(a + 1, 0, b), vid(a + 1, 0, b + 1), vid(a, 0, b + 1)])
            faces.append([vid(a, k, b), vid(a, k, b + 1), vid(a + 1, k, b + 1), vid(a + 1, k, b)])
            # -x and +x
            faces.append([vid(0, a, b), vid(0, a, b + 1), vid(0, a + 1, b + 1), vid(0, a + 1, b)])
            faces.append([vid(k, a, b), vid(k, a + 1, b), vid(k, a + 1, b + 1), vid(k, a, b + 1)])
    return verts, faces


def cylinder_mesh(d, h, seg, stacks, rings):
    r = d / 2
    verts = []
    ring = lambda rad, z: [(rad * math.cos(2 * math.pi * i / seg), rad * math.sin(2 * math.pi * i / seg), z) for i in range(seg)]
    for s in range(stacks + 1):
        verts += ring(r, h * s / stacks)
    side = lambda s, i: s * seg + i % seg
    faces = []
    for s in range(stacks):
        for i in range(seg):
            faces.append([side(s, i), side(s, i + 1), side(s + 1, i + 1), side(s + 1, i)])

    def cap(z, outer, up):
        ids = [outer]
        for q in range(rings - 1, 0, -1):
            ids.append(len(verts))
            verts.extend(ring(r * q / rings, z))
        center = len(verts)
        verts.append((0.0, 0.0, z))
        for q in range(len(ids) - 1):
            a, b = ids[q], ids[q + 1]
            for i in range(seg):
                f = [a + i, a + (i + 1) % seg, b + (i + 1) % seg, b + i]
                faces.append(f if up else f[::-1])
        last = ids[-1]
        for i in range(seg):
            f = [last + i, last + (i + 1) % seg, center]
            faces.append(f if up else f[::-1])

    cap(h, stacks * seg, True)
    cap(0.0, 0, False)
    return verts, faces


def ellipsoid_mesh(sx, sy, sz, lat, lon):
    """Ellipsoid resting on z = 0."""
    verts = [(0.0, 0.0, 0.0)]
    for i in range(1, lat):
        th = math.pi * i / lat
        for j in range(lon):
            ph = 2 * math.pi * j / lon
            verts.append((
                sx / 2 * math.sin(th) * math.cos(ph),
                sy / 2 * math.sin(th) * math.sin(ph),
                sz / 2 * (1 - math.cos(th)),
            ))
    top = len(verts)
    verts.append((0.0, 0.0, sz))
    at = lambda i, j: 1 + (i - 1) * lon + j % lon
    faces = []
    for j in range(lon):
        faces.append([0, at(1, j + 1), at(1, j)])
        faces.append([top, at(lat - 1, j), at(lat - 1, j + 1)])
    for i in range(1, lat - 1):
        for j in range(lon):
            faces.append([at(i, j), at(i, j + 1), at(i + 1, j + 1), at(i + 1, j)])
    return verts, faces


# name: (shape, dims, mass kg, smallest grip m, override)
OBJECTS = {
    "banana": ("ellipsoid", (0.19, 0.036, 0.036), 0.066, 0.036, None),
    "foam_brick": ("box", (0.075, 0.05, 0.05), 0.028, 0.05, None),
    "gelatin_box": ("box", (0.089, 0.073, 0.028), 0.097, 0.028, None),
    "mustard_bottle": ("box", (0.095, 0.058, 0.19), 0.603, 0.058,
                       (True, "payload exceeded by 0.1 kg; the grip on the cap region holds the bottle")),
    "potted_meat_can": ("box", (0.1, 0.06, 0.083), 0.37, 0.06, None),
    "hammer": ("box", (0.33, 0.035, 0.035), 0.665, 0.035, None),
    "chips_can": ("cylinder", (0.075, 0.25), 0.205, 0.075, None),
    "tennis_ball": ("ellipsoid", (0.064, 0.064, 0.064), 0.058, 0.064, None),
    "cracker_box": ("box", (0.16, 0.06, 0.21), 0.411, 0.06, None),
    "pear": ("ellipsoid", (0.066, 0.066, 0.1), 0.049, 0.066, None),
    "scissors": ("box", (0.2, 0.08, 0.015), 0.082, 0.015, (False, "very low profile, fingers cannot reach under it")),
    "strawberry": ("ellipsoid", (0.045, 0.045, 0.05), 0.018, 0.045, None),
    "power_drill": ("box", (0.19, 0.06, 0.18), 0.895, 0.06, None),
    "medium_clamp": ("box", (0.09, 0.1, 0.035), 0.059, 0.035, (False, "very low profile, fingers cannot reach under it")),
    "master_chef_can": ("cylinder", (0.102, 0.14), 0.414, 0.102, None),
    "tomato_soup_can": ("cylinder", (0.066, 0.101), 0.349, 0.066, None),
}


def mesh_for(shape, dims):
    if shape == "box":
        return box_mesh(*dims, k=29)
    if shape == "cylinder":
        return cylinder_mesh(*dims, seg=128, stacks=30, rings=8)
    return ellipsoid_mesh(*dims, lat=50, lon=100)


def height(shape, dims):
    return dims[1] if shape == "cylinder" else dims[2]


# ---------------------------------------------------------------- layouts

# Per region (1-based, row-major from the board origin): reach and
# calibration outcome as poses reached out of 4.
REGION_TARGETS = {
    0: {1: (4, 3), 2: (3, 1), 3: (4, 4), 4: (4, 4), 5: (3, 1), 6: (2, 2)},
    1: {1: (1, 0), 2: (3, 1), 3: (2, 2), 4: (4, 4), 5: (4, 3), 6: (3, 1)},
    2: {1: (4, 3), 2: (3, 1), 3: (2, 2), 4: (4, 4), 5: (1, 0), 6: (3, 1)},
}

# object, region, offset from the cell center (m), yaw (deg)
PLACEMENT = {
    0: [
        ("banana", 1, (0.0, 0.0), 30),
        ("foam_brick", 2, (0.0, 0.0), 0),
        ("gelatin_box", 5, (0.0, 0.0), 15),
        ("mustard_bottle", 3, (0.0, 0.0), 90),
        ("potted_meat_can", 4, (0.0, 0.0), 0),
    ],
    1: [
        ("banana", 1, (0.0, 0.0), 0),
        ("hammer", 2, (0.0, 0.0), 20),
        ("chips_can", 3, (0.0, 0.0), 0),
        ("tennis_ball", 4, (-0.05, 0.0), 0),
        ("cracker_box", 4, (0.04, 0.0), 90),
        ("mustard_bottle", 6, (0.0, 0.0), 0),
        ("potted_meat_can", 5, (0.0, 0.0), 45),
    ],
    2: [
        ("pear", 1, (-0.045, 0.0), 0),
        ("scissors", 2, (0.0, 0.045), 0),
        ("chips_can", 3, (-0.045, 0.0), 0),
        ("strawberry", 4, (-0.05, 0.0), 0),
        ("tennis_ball", 1, (0.045, 0.0), 0),
        ("power_drill", 5, (0.0, 0.0), 0),
        ("mustard_bottle", 3, (0.045, 0.0), 90),
        ("medium_clamp", 2, (0.0, -0.05), 0),
        ("master_chef_can", 4, (0.045, 0.0), 0),
        ("potted_meat_can", 6, (-0.045, 0.0), 0),
        ("tomato_soup_can", 6, (0.05, 0.0), 0),
    ],
}

PUBLISHED = {0: 0.6, 1: 0.7, 2: 0.77}


def cell_center(region):
    row, col = divmod(region - 1, COLS)
    return ((col + 0.5) * CELL_W, (row + 0.5) * CELL_H)


def object_pose(name, region, offset, yaw):
    cx, cy = cell_center(region)
    return rot_z(math.radians(yaw)), (round(cx + offset[0], 6), round(cy + offset[1], 6), 0.0)


def layout_xml(lid):
    out = ['<?xml version="1.0" encoding="UTF-8"?>', f'<layout id="{lid}" published_score="{num(PUBLISHED[lid])}">']
    for name, region, offset, yaw in PLACEMENT[lid]:
        shape, dims, mass, grip, override = OBJECTS[name]
        r, p = object_pose(name, region, offset, yaw)
        out.append(f'  <object name="{name}">')
        out.append(f"    <mesh>../meshes/{name}.off</mesh>")
        out.append(f"    <pose>{pose(r, p)}</pose>")
        out.append(f"    <mass>{num(mass)}</mass>")
        out.append(f"    <min_grip>{num(grip)}</min_grip>")
        if override:
            out.append(f'    <graspable value="{str(override[0]).lower()}">{override[1]}</graspable>')
        out.append("  </object>")
    out.append("</layout>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- poses and logs

DOWN = rot_x(math.pi)


def pose_grid():
    """24 poses, 4 per region, 0.2 m above the board, hand pointing down."""
    poses = []
    for i in range(4):
        for j in range(6):
            x = 0.0495 + 0.099 * j
            y = 0.0525 + 0.105 * i
            poses.append((f"p{i}{j}", (round(x, 4), round(y, 4), 0.2)))
    return poses


def region_of(xy):
    col = int(xy[0] // CELL_W)
    row = int(xy[1] // CELL_H)
    return row * COLS + col + 1


def pose_set_xml(lid):
    out = ['<?xml version="1.0" encoding="UTF-8"?>', f'<pose_set id="{lid}">']
    for name, p in pose_grid():
        out.append(f'  <pose name="{name}">{pose(DOWN, p)}</pose>')
    out.append("</pose_set>")
    return "\n".join(out) + "\n"


def reach_log_xml(lid, source):
    which = 0 if source == "forward_kinematics" else 1
    near, far = (0.005, 0.05) if which == 0 else (0.02, 0.1)
    count = {}
    out = ['<?xml version="1.0" encoding="UTF-8"?>', f'<reach_log set="{lid}" source="{source}">']
    for name, p in sorted(pose_grid()):
        region = region_of(p)
        k = count.get(region, 0)
        count[region] = k + 1
        target = REGION_TARGETS[lid][region][which]
        out.append(f'  <entry name="{name}">')
        if k < target:
            r = matmul(DOWN, rot_z(0.1))
            out.append(f"    <pose>{pose(r, (p[0] + near, p[1], p[2]))}</pose>")
        elif k % 2 == 0:
            out.append("    <unreached/>")
        else:
            out.append(f"    <pose>{pose(DOWN, (p[0] + far, p[1], p[2]))}</pose>")
        out.append("  </entry>")
    out.append("</reach_log>")
    return "\n".join(out) + "\n"


# Reference run. Per object: grasped flags, waypoints reached and S3 per
# trial; None marks objects without executed grasps.
RUN = {
    0: {
        "banana": ([1, 1, 1, 1, 0], [1, 1, 1, 2, 0], [0.2, 0.2, 0.2, 0.2, 0.8]),
        "foam_brick": ([1, 0, 0, 0, 0], [5, 0, 0, 0, 0], [0.27] * 5),
        "gelatin_box": ([1, 0, 0, 0, 0], [0] * 5, [0.07] * 5),
        "mustard_bottle": ([1] * 5, [4] * 5, [0.15] * 5),
        "potted_meat_can": ([1, 1, 1, 1, 0], [3, 3, 3, 2, 0], [0.0175] * 4 + [0.0]),
    },
    1: {
        "banana": ([0] * 5, [0] * 5, [0.19] * 5),
        "hammer": None,
        "chips_can": ([1] * 5, [5] * 5, [0.25] * 5),
        "tennis_ball": ([1, 0, 0, 0, 0], [5, 0, 0, 0, 0], [0.45] + [0.175] * 4),
        "cracker_box": ([1, 1, 1, 1, 0], [3, 3, 3, 4, 0], [0.025] * 4 + [0.1]),
        "mustard_bottle": ([1, 1, 1, 1, 0], [1, 1, 1, 1, 0], [0.23] * 5),
        "potted_meat_can": ([1, 1, 1, 1, 0], [5, 5, 4, 4, 0], [0.0] * 4 + [0.05]),
    },
    2: {
        "pear": ([0] * 5, [0] * 5, [0.0] * 5),
        "scissors": None,
        "chips_can": ([1] * 5, [5] * 5, [0.48] * 5),
        "strawberry": ([1, 1, 1, 0, 0], [4, 4, 4, 0, 0], [0.05, 0.05, 0.05, 0.25, 0.25]),
        "tennis_ball": ([1, 1, 0, 0, 0], [5, 5, 0, 0, 0], [0.075, 0.075, 0.1, 0.1, 0.0]),
        "power_drill": None,
        "mustard_bottle": ([1] * 5, [5] * 5, [0.25] * 5),
        "medium_clamp": None,
        "master_chef_can": None,
        "potted_meat_can": None,
        "tomato_soup_can": None,
    },
}

HAND = "icub_right_hand"


def execution_xml(lid):
    out = ['<?xml version="1.0" encoding="UTF-8"?>', f'<execution_log layout="{lid}" modality="isolation">']
    for name in sorted(RUN[lid]):
        rec = RUN[lid][name]
        if rec is None:
            out.append(f'  <object name="{name}" no_data="true"/>')
            continue
        out.append(f'  <object name="{name}">')
        for g, w in zip(rec[0], rec[1]):
            out.append(f'    <trial grasped="{str(bool(g)).lower()}" waypoints="{w}"/>')
        out.append("  </object>")
    out.append("</execution_log>")
    return "\n".join(out) + "\n"


def quality_xml(lid):
    out = ['<?xml version="1.0" encoding="UTF-8"?>', f'<quality layout="{lid}">']
    for name in sorted(RUN[lid]):
        rec = RUN[lid][name]
        if rec is None:
            out.append(f'  <object name="{name}" no_data="true"/>')
            continue
        out.append(f'  <object name="{name}">')
        for s3 in rec[2]:
            out.append(f'    <trial s3="{num(s3)}" penetrations="0"/>')
        out.append("  </object>")
    out.append("</quality>")
    return "\n".join(out) + "\n"


def grasp_xml(lid):
    """Top grasps: palm 5 mm above the object, fingers closing across the
    smallest horizontal dimension."""
    placed = {p[0]: p for p in PLACEMENT[lid]}
    out = ['<?xml version="1.0" encoding="UTF-8"?>', f'<grasp_set layout="{lid}">']
    for name in sorted(RUN[lid]):
        rec = RUN[lid][name]
        if rec is None:
            out.append(f'  <object name="{name}" no_data="true"/>')
            continue
        shape, dims, *_ = OBJECTS[name]
        _, region, offset, yaw = placed[name]
        _, (x, y, _) = object_pose(name, region, offset, yaw)
        narrow_y = shape == "box" and dims[1] < dims[0] or shape == "ellipsoid" and dims[1] < dims[0]
        base_yaw = yaw + (90 if narrow_y else 0)
        top = height(shape, dims)
        out.append(f'  <object name="{name}">')
        for t in range(5):
            dyaw = (-4, -2, 0, 2, 4)[t]
            dx = (0.0, 0.002, -0.002, 0.001, -0.001)[t]
            r = rot_z(math.radians(base_yaw + dyaw))
            out.append(f'    <trial hand="{HAND}">')
            out.append(f"      <pose>{pose(r, (round(x + dx, 6), y, round(top + 0.005, 6)))}</pose>")
            out.append("      <pregrasp>")
            for j in ("thumb", "index", "middle"):
                out.append(f'        <joint name="{j}">0</joint>')
            out.append("      </pregrasp>")
            out.append("    </trial>")
        out.append("  </object>")
    out.append("</grasp_set>")
    return "\n".join(out) + "\n"


HAND_XML = f"""<?xml version="1.0" encoding="UTF-8"?>
<!-- Right hand of a humanoid: palm, opposing thumb and two fingers. Hand
     frame: fingers hang along -z, the thumb sits on -x. -->
<hand name="{HAND}" aperture="0.09" payload="0.5">
  <approach_axis>0 0 -1</approach_axis>
  <link name="palm"><box><size>0.06 0.07 0.02</size><center>0 0 0.01</center></box></link>
  <link name="thumb"><box><size>0.012 0.016 0.06</size><center>0 0 -0.03</center></box></link>
  <link name="index"><box><size>0.012 0.016 0.065</size><center>0 0 -0.0325</center></box></link>
  <link name="middle"><box><size>0.012 0.016 0.065</size><center>0 0 -0.0325</center></box></link>
  <joint name="thumb" type="revolute" parent="palm" child="thumb">
    <origin>1 0 0 -0.05  0 1 0 0  0 0 1 0  0 0 0 1</origin>
    <axis>0 -1 0</axis><limits lo="0" hi="1.4"/>
  </joint>
  <joint name="index" type="revolute" parent="palm" child="index">
    <origin>1 0 0 0.05  0 1 0 0.022  0 0 1 0  0 0 0 1</origin>
    <axis>0 1 0</axis><limits lo="0" hi="1.4"/>
  </joint>
  <joint name="middle" type="revolute" parent="palm" child="middle">
    <origin>1 0 0 0.05  0 1 0 -0.022  0 0 1 0  0 0 0 1</origin>
    <axis>0 1 0</axis><limits lo="0" hi="1.4"/>
  </joint>
</hand>
"""

CONFIG_XML = """<?xml version="1.0" encoding="UTF-8"?>
<config>
  <robot>iCub</robot>
  <end_effector>right hand</end_effector>
  <modality>isolation</modality>
  <uses_vision>true</uses_vision>
  <reach tau_p="0.02" tau_o="0.5"/>
  <calibration tau_p="0.045" tau_o="0.8"/>
  <trials>5</trials>
  <friction mu="0.5" cone_edges="8"/>
  <perturbation dp="0.005" da="0.0873"/>
  <lift>0.15</lift>
  <approach_axis>0 0 -1</approach_axis>
  <contact_eps>0.001</contact_eps>
  <closure_step>0.017453292519943295</closure_step>
  <ows samples="200" seed="42"/>
  <eligibility threshold="0.5" strict="false"/>
</config>
"""


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main():
    for name, (shape, dims, *_rest) in OBJECTS.items():
        v, f = mesh_for(shape, dims)
        write(ROOT / "meshes" / f"{name}.off", off(v, f))
    write(ROOT / "hand.xml", HAND_XML)
    write(ROOT / "config.xml", CONFIG_XML)
    for lid in (0, 1, 2):
        write(ROOT / "layouts" / f"layout_{lid}.xml", layout_xml(lid))
        write(ROOT / "poses" / f"poses_{lid}.xml", pose_set_xml(lid))
        write(ROOT / "logs" / f"reach_{lid}.xml", reach_log_xml(lid, "forward_kinematics"))
        write(ROOT / "logs" / f"calibration_{lid}.xml", reach_log_xml(lid, "vision"))
        write(ROOT / "logs" / f"grasps_{lid}.xml", grasp_xml(lid))
        write(ROOT / "logs" / f"execution_{lid}.xml", execution_xml(lid))
        write(ROOT / "cache" / f"quality_{lid}.xml", quality_xml(lid))


if __name__ == "__main__":
    main()
