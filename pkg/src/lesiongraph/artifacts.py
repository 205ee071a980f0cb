"""On-disk formats for maps, signals, graphs, feature matrices and reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .features import FusedFeatureVector, GraphFeatureVector
from .graph import WeightedGraph
from .signals import NodalSignalMatrix
from .superpixel import MultiLevelMaps, SuperpixelMap


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


# ------------------------------------------------------------ superpixel maps


def map_stem(level_index: int, n: int) -> str:
    return f"level{level_index}_n{n:03d}"


def save_map(smap: SuperpixelMap, path_png, mode: str = "ensemble", parents=None) -> None:
    """16-bit PNG label image plus ``.json`` sidecar (n, level_index, mode, parents)."""
    path_png = Path(path_png)
    path_png.parent.mkdir(parents=True, exist_ok=True)
    if smap.n > 65535:
        raise ValueError("16-bit label PNG holds at most 65535 nodes")
    Image.fromarray(smap.labels.astype(np.uint16)).save(path_png)
    write_json(path_png.with_suffix(".json"), {
        "n": smap.n,
        "level_index": smap.level_index,
        "mode": mode,
        "parents": None if parents is None else [int(p) for p in parents],
    })


def load_map(path_png) -> tuple[SuperpixelMap, dict]:
    path_png = Path(path_png)
    meta = read_json(path_png.with_suffix(".json"))
    with Image.open(path_png) as im:
        labels = np.asarray(im).astype(np.int32)
    return SuperpixelMap(labels, int(meta["n"]), int(meta["level_index"])), meta


def save_multilevel(maps: MultiLevelMaps, directory) -> list[Path]:
    directory = Path(directory)
    paths = []
    for i, smap in enumerate(maps.maps):
        parents = maps.parents[i - 1] if (maps.parents is not None and i > 0) else None
        path = directory / f"{map_stem(i, smap.n)}.png"
        save_map(smap, path, maps.mode, parents)
        paths.append(path)
    return paths


def load_multilevel(directory) -> MultiLevelMaps:
    directory = Path(directory)
    loaded = [load_map(p) for p in sorted(directory.glob("level*_n*.png"))]
    loaded.sort(key=lambda item: item[0].level_index)
    mode = loaded[0][1]["mode"] if loaded else "ensemble"
    maps = tuple(m for m, _ in loaded)
    parents = None
    if mode == "hierarchy":
        parents = tuple(np.asarray(meta["parents"], dtype=np.int32) for _, meta in loaded[1:])
    return MultiLevelMaps(maps, mode, parents)


# ------------------------------------------------------------ signals and graphs


def save_signal_csv(sm: NodalSignalMatrix, path) -> None:
    """One row per node, header ``node,f0..f{m-1}``; the kind goes in the filename suffix."""
    path = Path(path)
    if not path.name.endswith(f"_{sm.kind}.csv"):
        raise ValueError(f"signal file name must end with _{sm.kind}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["node"] + [f"f{j}" for j in range(sm.m)])
        for i, row in enumerate(sm.X):
            w.writerow([i] + [repr(float(v)) for v in row])


def load_signal_csv(path) -> NodalSignalMatrix:
    path = Path(path)
    kind = path.stem.rsplit("_", 1)[-1]
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return NodalSignalMatrix(data[:, 1:], kind)


def save_weights_csv(g: WeightedGraph, path) -> None:
    """Dense n x n matrix with header ``n0..n{n-1}``, 17 significant digits; scheme in a ``.json`` sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join(f"n{j}" for j in range(g.n))
    np.savetxt(path, g.W, delimiter=",", fmt="%.17g", header=header, comments="")
    write_json(path.with_suffix(".json"), {"n": g.n, "scheme": g.scheme})


def load_weights_csv(path) -> WeightedGraph:
    path = Path(path)
    W = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta_path = path.with_suffix(".json")
    scheme = read_json(meta_path)["scheme"] if meta_path.exists() else "gaussian"
    return WeightedGraph(W, scheme)


def save_trace_csv(trace: Sequence[tuple[int, float]], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "objective"])
        for k, f in trace:
            w.writerow([k, repr(float(f))])


def save_graph_features(v: GraphFeatureVector, path) -> None:
    write_json(path, {"level_n": v.level_n, "kind": v.kind, "f1_len": v.f1_len, "f2_len": v.f2_len,
                      "values": [float(x) for x in v.values]})


def load_graph_features(path) -> GraphFeatureVector:
    d = read_json(path)
    return GraphFeatureVector(np.asarray(d["values"]), int(d["level_n"]), d["kind"])


# ------------------------------------------------------------ feature matrices


def layout_json(layout) -> list[dict]:
    return [{"tag": tag, "offset": off, "length": length} for tag, off, length in layout]


def save_feature_matrix(ids: Sequence[str], labels: Sequence[str], vectors: Sequence[FusedFeatureVector],
                        path, extra_meta: dict | None = None) -> None:
    """CSV ``id,label,f0..f{K-1}`` plus a ``<stem>_layout.json`` sidecar of column ranges."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    layouts = {v.layout for v in vectors}
    if len(layouts) > 1:
        raise ValueError("all feature vectors must share one layout")
    K = len(vectors[0].values) if vectors else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "label"] + [f"f{j}" for j in range(K)])
        for image_id, label, v in zip(ids, labels, vectors):
            w.writerow([image_id, label] + [repr(float(x)) for x in v.values])
    meta = {"n_features": K, "layout": layout_json(vectors[0].layout if vectors else ())}
    meta.update(extra_meta or {})
    write_json(layout_path(path), meta)


def layout_path(features_csv) -> Path:
    p = Path(features_csv)
    return p.with_name(p.stem + "_layout.json")


def load_feature_matrix(path) -> tuple[list[str], list[str], np.ndarray, list[str]]:
    """Return ids, labels, the feature matrix and one source tag per column."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    ids = [r[0] for r in body]
    labels = [r[1] for r in body]
    X = np.array([[float(x) for x in r[2:]] for r in body], dtype=np.float64).reshape(len(body), len(header) - 2)
    tags = ["features"] * X.shape[1]
    lp = layout_path(path)
    if lp.exists():
        tags = []
        for block in read_json(lp)["layout"]:
            tags.extend([block["tag"]] * block["length"])
    return ids, labels, X, tags
