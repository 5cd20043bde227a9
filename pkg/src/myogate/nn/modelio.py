"""Model persistence: a text manifest plus a little-endian float32 weight blob.

Layout for stem ``model``: ``model.manifest`` and ``model.weights``. The blob
holds every weight tensor flattened in layer order (weights before bias within
a layer); the manifest records layer specs, shapes, the seed, a sha256 of the
blob, and free-form metadata lines. Round trips are bit-exact for float32
networks.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, ParseError
from .network import Network

FORMAT_VERSION = 1


def _spec_to_line(index: int, spec: dict) -> str:
    kind = spec["kind"]
    extras = " ".join(f"{k}={spec[k]}" for k in sorted(spec) if k != "kind")
    return f"layer {index} {kind} {extras}".rstrip()


def _spec_from_line(parts: list[str], line_no: int) -> dict:
    spec: dict = {"kind": parts[2]}
    for item in parts[3:]:
        key, _, value = item.partition("=")
        if not _:
            raise ParseError(f"malformed layer parameter {item!r}", line_no)
        spec[key] = float(value) if "." in value else int(value)
    return spec


def save_model(net: Network, stem: str | Path, meta: dict[str, str] | None = None) -> None:
    if net.dtype != np.float32:
        raise ConfigurationError(f"model files store float32 weights; network is {net.dtype}")
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    params = net.parameters()
    blob = b"".join(np.ascontiguousarray(p, dtype="<f4").tobytes() for p in params)
    checksum = hashlib.sha256(blob).hexdigest()

    lines = [
        f"format_version {FORMAT_VERSION}",
        f"rng_seed {net.rng_seed}",
        f"n_layers {len(net.layers)}",
    ]
    lines += [_spec_to_line(i, spec) for i, spec in enumerate(net.specs())]
    lines += [f"shape {i} {','.join(str(d) for d in p.shape)}" for i, p in enumerate(params)]
    lines.append(f"checksum sha256:{checksum}")
    for key, value in (meta or {}).items():
        if "\n" in str(value):
            raise ConfigurationError(f"meta value for {key!r} must be single-line")
        lines.append(f"meta {key} {value}")

    stem.with_suffix(".weights").write_bytes(blob)
    stem.with_suffix(".manifest").write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(stem: str | Path) -> tuple[Network, dict[str, str]]:
    stem = Path(stem)
    manifest_path = stem.with_suffix(".manifest")
    if not manifest_path.exists():
        raise ConfigurationError(f"missing manifest: {manifest_path}")
    specs: list[dict] = []
    shapes: list[tuple[int, ...]] = []
    meta: dict[str, str] = {}
    seed = 0
    checksum = None
    for line_no, raw in enumerate(manifest_path.read_text(encoding="utf-8").splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        key = parts[0]
        if key == "format_version":
            if int(parts[1]) != FORMAT_VERSION:
                raise ParseError(f"unsupported format version {parts[1]}", line_no)
        elif key == "rng_seed":
            seed = int(parts[1])
        elif key == "layer":
            specs.append(_spec_from_line(parts, line_no))
        elif key == "shape":
            shapes.append(tuple(int(d) for d in parts[2].split(",")))
        elif key == "checksum":
            checksum = parts[1].removeprefix("sha256:")
        elif key == "meta":
            meta[parts[1]] = raw.split(maxsplit=2)[2] if len(parts) > 2 else ""
        elif key != "n_layers":
            raise ParseError(f"unknown manifest key {key!r}", line_no)

    blob = stem.with_suffix(".weights").read_bytes()
    if checksum is not None and hashlib.sha256(blob).hexdigest() != checksum:
        raise ConfigurationError(f"weight blob checksum mismatch for {stem}")
    flat = np.frombuffer(blob, dtype="<f4")
    expected = sum(int(np.prod(s)) for s in shapes)
    if flat.size != expected:
        raise ConfigurationError(f"weight blob holds {flat.size} values, manifest expects {expected}")

    net = Network.build(specs, seed, np.float32)
    values = []
    offset = 0
    for shape in shapes:
        size = int(np.prod(shape))
        values.append(flat[offset:offset + size].reshape(shape).copy())
        offset += size
    net.set_parameters(values)
    return net, meta
