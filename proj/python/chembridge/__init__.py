# Copyright 2026 The chembridge Authors
# SPDX-License-Identifier: Apache-2.0
"""Align molecular fingerprints with text embeddings.

Thin wrapper over the compiled core: hashed circular fingerprints, scaffold
keys and splits, deterministic text hashing, contrastive projection heads and
the cross-modal retrieval report.
"""

import json as _json

from ._core import (
    DataError,
    Error,
    IoError,
    NumericError,
    SchemaError,
    __version__,
    ecfp,
    eval_report_json,
    hash_embed,
    load_dataset,
    project,
    random_split,
    read_emb1,
    scaffold_key,
    scaffold_split,
    tanimoto,
    train_bridge,
    write_emb1,
)


def eval_report(B_T, B_M, target_ids, bootstrap_B=0, seed=0, min_group=3, k_max=50):
    """Retrieval metric suite in both directions, as a nested dict."""
    return _json.loads(
        eval_report_json(B_T, B_M, target_ids, bootstrap_B, seed, min_group, k_max)
    )


__all__ = [
    "DataError",
    "Error",
    "IoError",
    "NumericError",
    "SchemaError",
    "__version__",
    "ecfp",
    "eval_report",
    "eval_report_json",
    "hash_embed",
    "load_dataset",
    "project",
    "random_split",
    "read_emb1",
    "scaffold_key",
    "scaffold_split",
    "tanimoto",
    "train_bridge",
    "write_emb1",
]
