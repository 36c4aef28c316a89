"""Append-only run manifest with content checksums.

Every artifact a command writes (circuit files, count tables, reports) is
recorded as one `kind key=value ...` line including its sha256, so a run
can be audited and reproduced bit-exactly.
"""
from __future__ import annotations

import hashlib
import os

_HEADER = "# ssbv manifest v1"


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def start_manifest(path) -> None:
    with open(path, "w") as fh:
        fh.write(_HEADER + "\n")


def append_entry(path, kind: str, **fields) -> None:
    parts = [kind] + [f"{k}={fields[k]}" for k in fields]
    with open(path, "a") as fh:
        fh.write(" ".join(parts) + "\n")


def append_file_entry(manifest_path, kind: str, file_path, **fields) -> None:
    rel = os.path.relpath(file_path, os.path.dirname(os.path.abspath(manifest_path)))
    append_entry(manifest_path, kind, file=rel, sha256=file_sha256(file_path),
                 **fields)


def read_manifest(path) -> list[dict[str, str]]:
    entries = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            kind, *rest = ln.split()
            entry = {"kind": kind}
            for tok in rest:
                key, _, value = tok.partition("=")
                entry[key] = value
            entries.append(entry)
    return entries


def verify_manifest(path) -> list[str]:
    """Return a list of problems: missing files or checksum mismatches."""
    base = os.path.dirname(os.path.abspath(path))
    problems = []
    for entry in read_manifest(path):
        if "file" not in entry:
            continue
        fpath = os.path.join(base, entry["file"])
        if not os.path.exists(fpath):
            problems.append(f"missing file {entry['file']}")
        elif "sha256" in entry and file_sha256(fpath) != entry["sha256"]:
            problems.append(f"checksum mismatch for {entry['file']}")
    return problems
