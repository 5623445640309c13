"""Writers for the engine's vector file formats. All writes are atomic
(temp file in the target directory, then rename)."""

from __future__ import annotations

import contextlib
import os
import struct
import tempfile

import numpy as np

CTX_MAGIC = b"XCORefCTX1"


@contextlib.contextmanager
def atomic_open(path, mode):
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-",
                               suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def write_static(table: dict[str, np.ndarray], path) -> None:
    """word<TAB>space-separated floats, one word per line."""
    with atomic_open(path, "w") as fh:
        for word in sorted(table):
            vec = table[word]
            fh.write(word + "\t" + " ".join(repr(float(x)) for x in vec) + "\n")


def write_ctx_binary(records: dict[tuple[str, int, int], np.ndarray],
                     dim: int, path) -> None:
    """magic, dim (u32), count (u64), then per record: u16 doc_id length +
    utf-8 bytes, u32 sent_idx, u32 tok_idx, float32*dim."""
    with atomic_open(path, "wb") as fh:
        fh.write(CTX_MAGIC)
        fh.write(struct.pack("<IQ", dim, len(records)))
        for (doc_id, sent_idx, tok_idx), vec in records.items():
            raw = doc_id.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<II", sent_idx, tok_idx))
            fh.write(np.asarray(vec, dtype=np.float32).tobytes())


def read_static(path) -> dict[str, np.ndarray]:
    table: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            word, _, rest = line.rstrip("\n").partition("\t")
            table[word] = np.array([float(x) for x in rest.split()])
    return table
