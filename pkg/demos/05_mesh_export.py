"""Turn a multi-label mask into a single textured .obj scene.

Builds a two-label mask (a big "liver" blob plus a small "tumor"), meshes
each label with marching cubes in physical millimetres, and combines them
into one Wavefront OBJ with a material per label.  The emitted surface is
closed: every mesh edge belongs to exactly two triangles.
"""

import os
from collections import Counter

import numpy as np

from liverseg import LabelVolume, export_obj, mesh_all_labels

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT_DIR, exist_ok=True)

shape = (30, 48, 48)
spacing = (2.5, 1.0, 1.0)
zz, yy, xx = np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")

labels = np.zeros(shape, dtype=np.uint8)
liver = (((zz - 15) / 10) ** 2 + ((yy - 24) / 16) ** 2 + ((xx - 24) / 18) ** 2) <= 1.0
tumor = (((zz - 15) / 3) ** 2 + ((yy - 20) / 4) ** 2 + ((xx - 28) / 4) ** 2) <= 1.0
labels[liver] = 1
labels[tumor] = 2
mask = LabelVolume(labels, spacing=spacing)

meshes = mesh_all_labels(mask)
for mesh in meshes:
    edges = Counter()
    for a, b, c in mesh.triangles:
        for u, v in ((a, b), (b, c), (a, c)):
            edges[(min(u, v), max(u, v))] += 1
    sharing = set(edges.values())
    span = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
    print(f"label {mesh.label} ({mesh.material_name}): "
          f"{len(mesh.vertices)} vertices, {len(mesh.triangles)} triangles, "
          f"extent {span[0]:.0f} x {span[1]:.0f} x {span[2]:.0f} mm, "
          f"edge sharing counts {sorted(sharing)}")

obj_path = os.path.join(OUT_DIR, "liver_scene.obj")
export_obj(meshes, obj_path)
print(f"scene written to {obj_path} (+ .mtl); open it in any OBJ viewer")
