"""Self-describing npz checkpoints: parameters + config + optimizer state.

Arrays are stored verbatim (float64 blobs round-trip bit-exactly); metadata
rides along as a JSON document so a checkpoint can be rebuilt without any
external context.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .adam import AdamState
from .params import ParameterStore
from .tensor import ComputeError

_FORMAT = "parasphere-checkpoint-1"


def save_checkpoint(path, store: ParameterStore, config: dict,
                    adam: AdamState | None = None) -> None:
    meta = {
        "format": _FORMAT,
        "config": config,
        "trainable": {n: store.is_trainable(n) for n in store.names()},
        "order": store.names(),
        "adam": None,
    }
    blobs: dict[str, np.ndarray] = {}
    for name in store.names():
        blobs["p:" + name] = store[name].data
    if adam is not None:
        meta["adam"] = {"lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2,
                        "eps": adam.eps, "step": adam.step}
        for name, arr in adam.m.items():
            blobs["am:" + name] = arr
        for name, arr in adam.v.items():
            blobs["av:" + name] = arr
    blobs["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, **blobs)


def load_checkpoint(path) -> tuple[ParameterStore, dict, AdamState | None]:
    with np.load(path) as blobs:
        if "meta" not in blobs:
            raise ComputeError(f"{path}: not a checkpoint (missing metadata)")
        meta = json.loads(bytes(blobs["meta"]).decode("utf-8"))
        if meta.get("format") != _FORMAT:
            raise ComputeError(f"{path}: unsupported checkpoint format {meta.get('format')!r}")
        store = ParameterStore()
        for name in meta["order"]:
            store.add(name, blobs["p:" + name].copy(), trainable=meta["trainable"][name])
        adam = None
        if meta["adam"] is not None:
            a = meta["adam"]
            adam = AdamState(lr=a["lr"], beta1=a["beta1"], beta2=a["beta2"],
                             eps=a["eps"], step=a["step"])
            for name in store.trainable_names():
                adam.m[name] = blobs["am:" + name].copy()
                adam.v[name] = blobs["av:" + name].copy()
    return store, meta["config"], adam
