"""Model JSON documents and delimited report output."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from fractions import Fraction
from typing import Any, Iterable, Sequence

from rrtourney.model import (
    ModelError,
    ModelFamily,
    OutcomePmf,
    TournamentModel,
    canonical_preset,
    format_prob,
    parse_prob,
    preset,
)


def _pmf(values, where: str) -> OutcomePmf:
    if not isinstance(values, list):
        raise ModelError(f"{where}: PMF must be a list of probabilities")
    return OutcomePmf(tuple(parse_prob(v) for v in values))


def _preset_params(entry: dict) -> tuple[str, dict]:
    if "name" not in entry:
        raise ModelError("preset needs a 'name'")
    params = {k: v for k, v in entry.items() if k != "name"}
    return canonical_preset(entry["name"]), params


def family_from_json(doc: dict) -> ModelFamily:
    """The preset named in a model document, usable for any n."""
    if "preset" not in doc:
        raise ModelError("model document has no preset, so it cannot vary n")
    name, params = _preset_params(doc["preset"])
    return ModelFamily.of(name, **params)


def model_from_json(doc: dict, n: int | None = None) -> TournamentModel:
    """Build a model from a JSON document (players 1-based in ``pairs``)."""
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    unknown = set(doc) - {"n", "score_unit", "default_pmf", "pairs", "preset"}
    if unknown:
        raise ModelError(f"unknown model fields: {sorted(unknown)}")
    n = doc.get("n", n)
    if not isinstance(n, int) or isinstance(n, bool):
        raise ModelError("model document needs an integer 'n'")
    if "preset" in doc:
        if "pairs" in doc or "default_pmf" in doc:
            raise ModelError("'preset' excludes 'pairs' and 'default_pmf'")
        name, params = _preset_params(doc["preset"])
        model = preset(name, n, **params)
        if "score_unit" in doc and Fraction(doc["score_unit"]) != model.score_unit:
            raise ModelError(f"preset {name} fixes score_unit={model.score_unit}")
        return model
    unit = Fraction(str(doc.get("score_unit", "1")))
    default = _pmf(doc["default_pmf"], "default_pmf") if "default_pmf" in doc else None
    pairs = {}
    for k, entry in enumerate(doc.get("pairs", [])):
        try:
            i, j = int(entry["i"]) - 1, int(entry["j"]) - 1
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"pairs[{k}] needs integer 'i' and 'j'") from exc
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ModelError(f"pairs[{k}]: bad players ({i + 1}, {j + 1}) for n={n}")
        if (i, j) in pairs or (j, i) in pairs:
            raise ModelError(f"pairs[{k}]: pair ({i + 1}, {j + 1}) listed twice")
        pairs[(i, j)] = _pmf(entry.get("pmf"), f"pairs[{k}].pmf")
    if default is None and not pairs:
        raise ModelError("model document needs 'preset', 'default_pmf' or 'pairs'")
    if not pairs:
        return TournamentModel.homogeneous(n, default, score_unit=unit)
    return TournamentModel.from_pairs(n, pairs, default, score_unit=unit)


def load_model_file(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ModelError(f"{path}: {exc.strerror}") from exc


def model_to_json(model: TournamentModel) -> dict:
    doc: dict[str, Any] = {"n": model.n, "score_unit": format_prob(model.score_unit)}
    if model.preset is not None:
        name, params = model.preset
        doc["preset"] = {"name": name, **{k: (list(v) if isinstance(v, tuple) else v)
                                          for k, v in params}}
        return doc
    if model.assignment is None:
        doc["default_pmf"] = [format_prob(p) for p in model.palette[0].probs]
        return doc
    doc["pairs"] = [{"i": i + 1, "j": j + 1, "pmf": [format_prob(p) for p in model.pmf(i, j).probs]}
                    for i, j in model.pairs()]
    return doc


def cell(value) -> str:
    """Deterministic text for one output cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return format_prob(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([cell(v) for v in row])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, Fraction):
        return format_prob(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def render_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(_jsonable(r)) + "\n" for r in records)


def write_atomic(path: str | None, text: str) -> None:
    """Write ``text`` to ``path`` in one step (stdout when path is None or '-')."""
    if path is None or path == "-":
        import sys
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rrtourney-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
