"""On-disk formats: dictionary files, network containers, place memories.

Dictionary file layout (little-endian):
  magic "HSDD", version u32, M u32, N u32, grid_rows u32, grid_cols u32,
  atoms M*N float32 row-major,
  homeostasis table: B u32, eta_h f32, c_max f32, cdf M*B float32,
  grid weights (grid_rows*grid_cols)*N float32,
  atom assignment M pairs (row u32, col u32) in atom order.
Round-trips bit-exactly (values are stored and reloaded as float32).
"""
from __future__ import annotations

import hashlib
import io
import json
import struct
from pathlib import Path

import numpy as np

from .hierarchy import HsdNetwork, TslLayer
from .sparse import HOMEO_BINS, HomeostasisState
from .topology import SomGrid
from .vpr import PlaceCell, PlaceMemory, VigilanceConfig

DICT_MAGIC = b"HSDD"
MODEL_MAGIC = b"HSDM"
FORMAT_VERSION = 1


def _pack_dictionary(atoms: np.ndarray, homeo: HomeostasisState, grid: SomGrid) -> bytes:
    m, n = atoms.shape
    buf = io.BytesIO()
    buf.write(DICT_MAGIC)
    buf.write(struct.pack("<5I", FORMAT_VERSION, m, n, grid.rows, grid.cols))
    buf.write(atoms.astype("<f4").tobytes())
    buf.write(struct.pack("<Iff", HOMEO_BINS, homeo.eta_h, homeo.c_max))
    buf.write(homeo.cdf.astype("<f4").tobytes())
    buf.write(grid.weights.astype("<f4").tobytes())
    for i in range(m):
        r, c = grid.atom_assignment[i]
        buf.write(struct.pack("<2I", r, c))
    return buf.getvalue()


def _unpack_dictionary(blob: bytes) -> tuple[np.ndarray, HomeostasisState, SomGrid]:
    buf = io.BytesIO(blob)
    if buf.read(4) != DICT_MAGIC:
        raise ValueError("not a dictionary blob (bad magic)")
    version, m, n, rows, cols = struct.unpack("<5I", buf.read(20))
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported dictionary format version {version}")
    atoms = np.frombuffer(buf.read(4 * m * n), dtype="<f4").reshape(m, n).astype(np.float64)
    bins, eta_h, c_max = struct.unpack("<Iff", buf.read(12))
    if bins != HOMEO_BINS:
        raise ValueError(f"unexpected homeostasis bin count {bins}")
    cdf = np.frombuffer(buf.read(4 * m * bins), dtype="<f4").reshape(m, bins).astype(np.float64)
    weights = np.frombuffer(buf.read(4 * rows * cols * n), dtype="<f4").reshape(rows * cols, n).astype(np.float64)
    assignment = {}
    for i in range(m):
        r, c = struct.unpack("<2I", buf.read(8))
        assignment[i] = (r, c)
    homeo = HomeostasisState(cdf=cdf, c_max=float(c_max), eta_h=float(eta_h))
    grid = SomGrid(rows, cols, weights, assignment)
    return atoms, homeo, grid


def save_dictionary(path, atoms: np.ndarray, homeo: HomeostasisState, grid: SomGrid) -> None:
    Path(path).write_bytes(_pack_dictionary(atoms, homeo, grid))


def load_dictionary(path) -> tuple[np.ndarray, HomeostasisState, SomGrid]:
    return _unpack_dictionary(Path(path).read_bytes())


def save_network(path, net: HsdNetwork) -> None:
    """Container: metadata JSON plus both layer dictionary blobs."""
    meta = {
        "pool_size": net.pool_size,
        "n0_s1": net.s1.n0,
        "n0_s2": net.s2.n0,
        "config_tag": net.config_tag,
        "s1_reconstruction": net.s1_reconstruction,
        "s2_reconstruction": net.s2_reconstruction,
    }
    meta_b = json.dumps(meta, sort_keys=True).encode()
    empty1 = HomeostasisState.initial(net.s1.atoms.shape[0])
    empty2 = HomeostasisState.initial(net.s2.atoms.shape[0])
    d1 = _pack_dictionary(net.s1.atoms, empty1, net.s1.grid)
    d2 = _pack_dictionary(net.s2.atoms, empty2, net.s2.grid)
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<2I", FORMAT_VERSION, len(meta_b)))
        f.write(meta_b)
        for blob in (d1, d2):
            f.write(struct.pack("<Q", len(blob)))
            f.write(blob)


def load_network(path) -> HsdNetwork:
    with open(path, "rb") as f:
        if f.read(4) != MODEL_MAGIC:
            raise ValueError("not a network model file (bad magic)")
        version, meta_len = struct.unpack("<2I", f.read(8))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        meta = json.loads(f.read(meta_len))
        blobs = []
        for _ in range(2):
            (length,) = struct.unpack("<Q", f.read(8))
            blobs.append(f.read(length))
    atoms1, _, grid1 = _unpack_dictionary(blobs[0])
    atoms2, _, grid2 = _unpack_dictionary(blobs[1])
    net = HsdNetwork(
        s1=TslLayer(atoms1, grid1, meta["n0_s1"]),
        s2=TslLayer(atoms2, grid2, meta["n0_s2"]),
        pool_size=meta["pool_size"],
        config_tag=meta["config_tag"],
    )
    net.s1_reconstruction = meta.get("s1_reconstruction", float("nan"))
    net.s2_reconstruction = meta.get("s2_reconstruction", float("nan"))
    return net


def save_place_memory(path, memory: PlaceMemory) -> str:
    """Serialize signatures, cells and config; returns the file's sha256."""
    arrays = {}
    if memory.signatures:
        arrays["signatures"] = np.array(memory.signatures)
    for k, cell in enumerate(memory.cells):
        arrays[f"cell_{k:05d}_w"] = cell.weights
        arrays[f"cell_{k:05d}_meta"] = np.array(
            [cell.creation_index, cell.location[0], cell.location[1]]
        )
    arrays["meta"] = np.frombuffer(
        json.dumps(
            {
                "a_bins": memory.a_bins,
                "threshold": memory.config.threshold,
                "what_match_floor": memory.config.what_match_floor,
                "n_cells": len(memory.cells),
            }
        ).encode(),
        dtype=np.uint8,
    )
    with open(path, "wb") as f:
        np.savez(f, **arrays)
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_place_memory(path) -> PlaceMemory:
    data = np.load(path)
    meta = json.loads(bytes(data["meta"]))
    memory = PlaceMemory(
        a_bins=meta["a_bins"],
        config=VigilanceConfig(meta["threshold"], meta["what_match_floor"]),
    )
    if "signatures" in data:
        memory.signatures = [s.copy() for s in data["signatures"]]
    for k in range(meta["n_cells"]):
        w = data[f"cell_{k:05d}_w"]
        ci, lx, ly = data[f"cell_{k:05d}_meta"]
        memory.cells.append(PlaceCell(weights=w.copy(), creation_index=int(ci), location=(float(lx), float(ly))))
    return memory
