"""Reproducibility manifests written beside every command output.

A manifest records the tool version, the exact argument vector, content
hashes of the inputs, and the RNG seed, which is everything needed to
re-run the command. Outputs are deterministic functions of (inputs, flags,
seed), so a replay regenerates them bitwise identically; only the
manifest's own timestamp differs.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

from pegs import __version__
from pegs.errors import DataError

MANIFEST_SUFFIX = ".manifest.json"


def file_sha256(path: str | os.PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    tool_version: str = __version__
    rng_seed: int | None = None
    privacy: dict | None = None
    inputs: dict[str, dict] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    created_utc: str = ""

    def add_input(self, label: str, path: str | os.PathLike) -> None:
        self.inputs[label] = {"path": str(path), "sha256": file_sha256(path)}

    def to_json_obj(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "command": self.command,
            "argv": list(self.argv),
            "rng_seed": self.rng_seed,
            "privacy": self.privacy,
            "inputs": self.inputs,
            "outputs": list(self.outputs),
            "created_utc": self.created_utc,
        }

    def write_beside(self, outputs: list[str]) -> None:
        """Stamp and write one manifest sidecar per output file."""
        self.outputs = [str(p) for p in outputs]
        self.created_utc = datetime.now(timezone.utc).isoformat()
        body = json.dumps(self.to_json_obj(), indent=2, sort_keys=True) + "\n"
        for out in self.outputs:
            with open(out + MANIFEST_SUFFIX, "w", encoding="utf-8") as fh:
                fh.write(body)


def load_manifest(path: str | os.PathLike) -> RunManifest:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        return RunManifest(
            command=obj["command"],
            argv=list(obj["argv"]),
            tool_version=obj.get("tool_version", "unknown"),
            rng_seed=obj.get("rng_seed"),
            privacy=obj.get("privacy"),
            inputs=dict(obj.get("inputs", {})),
            outputs=list(obj.get("outputs", [])),
            created_utc=obj.get("created_utc", ""),
        )
    except KeyError as exc:
        raise DataError(f"{path}: manifest missing field {exc}") from None
