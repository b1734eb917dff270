"""JSON persistence of fitted models with version and integrity checks."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ArtifactVersionError, IntegrityError
from .forecaster import FIT_TYPES, NaiveFit, family_of
from .models.arima import ArimaFit
from .models.base import ModelFamily
from .models.decomposable import fit_from_dict, fit_to_dict
from .models.lstm import LstmFit
from .series import ContainerCategory, StockSeries

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def series_fingerprint(series: StockSeries) -> str:
    """SHA-256 over the index start, length, category and values of ``series``."""
    h = hashlib.sha256()
    h.update(f"{series.index.start}|{series.index.length}|{series.category.value}|".encode())
    h.update(np.ascontiguousarray(series.values, dtype="<i8").tobytes())
    return h.hexdigest()


def _payload(fit) -> dict:
    if isinstance(fit, (NaiveFit, ArimaFit, LstmFit)):
        return fit.to_dict()
    return fit_to_dict(fit)


def _from_payload(family: ModelFamily, payload: dict):
    if family is ModelFamily.DECOMPOSABLE:
        return fit_from_dict(payload)
    return FIT_TYPES[family].from_dict(payload)


def _canonical(body: dict) -> bytes:
    return json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()


@dataclass(frozen=True, eq=False)
class ModelArtifact:
    family: ModelFamily
    fit: object
    fingerprint: str | None
    created_at: str
    format_version: int = FORMAT_VERSION

    @property
    def category(self) -> ContainerCategory:
        return self.fit.category

    def check_series(self, series: StockSeries) -> bool:
        """Warn and return False when ``series`` is not the one the model was trained on."""
        if self.fingerprint is None:
            return True
        if series_fingerprint(series) != self.fingerprint:
            warnings.warn("artifact was trained on a different series (fingerprint mismatch)",
                          UserWarning, stacklevel=2)
            return False
        return True


def make_artifact(fit, series: StockSeries | None = None, created_at: str | None = None
                  ) -> ModelArtifact:
    stamp = created_at or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    fingerprint = None if series is None else series_fingerprint(series)
    return ModelArtifact(family_of(fit), fit, fingerprint, stamp)


def artifact_bytes(artifact: ModelArtifact) -> bytes:
    body = {
        "format_version": artifact.format_version,
        "family": artifact.family.value,
        "created_at": artifact.created_at,
        "fingerprint": artifact.fingerprint,
        "payload": _payload(artifact.fit),
    }
    digest = hashlib.sha256(_canonical(body)).hexdigest()
    doc = dict(body, sha256=digest)
    return (json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n").encode()


def save_artifact(fit_or_artifact, path, series: StockSeries | None = None) -> ModelArtifact:
    """Write a fit (or an existing artifact, unchanged) atomically to ``path``.

    Saving a loaded artifact again reproduces the original file byte for byte.
    """
    artifact = (fit_or_artifact if isinstance(fit_or_artifact, ModelArtifact)
                else make_artifact(fit_or_artifact, series))
    data = artifact_bytes(artifact)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.info("saved %s artifact to %s", artifact.family.value, path)
    return artifact


def parse_artifact(data: bytes, source: str = "<bytes>") -> ModelArtifact:
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"{source}: not a readable artifact ({exc})") from None
    if not isinstance(doc, dict) or "sha256" not in doc:
        raise IntegrityError(f"{source}: artifact has no integrity hash")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ArtifactVersionError(
            f"{source}: artifact format version {version!r} is incompatible with "
            f"this release (expects {FORMAT_VERSION})")
    digest = doc.pop("sha256")
    try:
        actual = hashlib.sha256(_canonical(doc)).hexdigest()
    except ValueError as exc:
        raise IntegrityError(f"{source}: {exc}") from None
    if actual != digest:
        raise IntegrityError(f"{source}: integrity hash mismatch, file is corrupt")
    try:
        family = ModelFamily.parse(doc["family"])
        fit = _from_payload(family, doc["payload"])
    except (KeyError, TypeError, ValueError) as exc:
        raise IntegrityError(f"{source}: malformed payload ({exc})") from None
    return ModelArtifact(family, fit, doc.get("fingerprint"), doc["created_at"], version)


def load_artifact(path, series: StockSeries | None = None) -> ModelArtifact:
    """Read and verify an artifact; warn when ``series`` does not match its fingerprint."""
    path = Path(path)
    artifact = parse_artifact(path.read_bytes(), str(path))
    if series is not None:
        artifact.check_series(series)
    return artifact


def artifact_path(root, category, family) -> Path:
    """Conventional location ``<root>/<category>/<family>.json``."""
    return (Path(root) / ContainerCategory.parse(category).value
            / f"{ModelFamily.parse(family).value}.json")
