"""Command-line front end: experiment drivers, config ingestion, CSV/JSON emitters.

Each subcommand reads one JSON config document (validated against a fixed
schema, unknown keys rejected), runs deterministically given (config,
seed), and writes CSV/JSON artifacts with 17-significant-digit floats so
reruns diff byte-identically. Exit codes: 0 success, 1 numerical or
assertion failure, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bands import (
    check_band_assumption,
    detect_bands,
    exact_projectors,
    synthetic_band_spectrum,
)
from .baselines import (
    adiabatic_time_estimate,
    prob_projection_depth,
    random_walk_success,
)
from .blockenc import dilate_hermitian
from .bosehubbard import GmonModel, band_labels, build_h0, build_h1, default_model, normalize_for_qsvt
from .chebyshev import FilterSpec, certify_filter, heaviside_filter
from .feedforward import (
    channel_distance,
    extract_kraus,
    feedforward_query_count,
    run_multiband,
)
from .linalg import (
    StateVector,
    eigh,
    hermitian_from_spectrum,
    matrix_from_json,
    matrix_to_json,
    rng,
)
from .qsp import synthesize_symmetric, to_circuit

__all__ = ["main", "ConfigError"]


class ConfigError(Exception):
    pass


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list, rows: list):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, doc):
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def _check_keys(doc: dict, allowed: dict, context: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{context}: expected a JSON object")
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    for key, required in allowed.items():
        if required and key not in doc:
            raise ConfigError(f"{context}: missing required key {key!r}")
    return doc


def _load_config(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def cmd_phases(config: dict, out: Path, seed: int) -> int:
    _check_keys(config, {"mu": True, "delta": True, "eps": True, "tol": False}, "phases")
    try:
        spec = FilterSpec(float(config["mu"]), float(config["delta"]), float(config["eps"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"phases: invalid filter parameters: {exc}") from exc
    tol = float(config.get("tol", 1e-11))

    filt = heaviside_filter(spec)
    psi = synthesize_symmetric(filt, tol)
    phi = to_circuit(psi)
    report = certify_filter(filt, spec)

    _write_json(out / "filter.json", filt.to_json())
    _write_json(out / "phases_su2.json", psi.to_json())
    _write_json(out / "phases_circuit.json", phi.to_json())
    rows = [
        [cond.name, _fmt(cond.bound), _fmt(cond.worst), _fmt(cond.margin), cond.passed]
        for cond in report.conditions()
    ]
    _write_csv(out / "certification.csv",
               ["condition", "bound", "worst_value", "margin", "passed"], rows)
    return 0 if report.passed else 1


def _resolve_model(doc: dict, seed: int):
    """Config model block -> (Hamiltonian with spectrum in (0,1), metadata)."""
    kind = doc.get("type")
    if kind == "inline":
        _check_keys(doc, {"type": True, "matrix": True}, "model")
        return matrix_from_json(doc["matrix"]), {"source": "inline"}
    if kind == "gmon":
        _check_keys(doc, {"type": True, "spec": False, "margin": False,
                          "perturb_seed": False}, "model")
        model = GmonModel.from_json(doc["spec"]) if "spec" in doc else default_model()
        if "perturb_seed" in doc:
            model = model.perturbed(int(doc["perturb_seed"]))
        h = build_h0(model) + build_h1(model)
        normalized, mapping = normalize_for_qsvt(h, float(doc.get("margin", 0.1)))
        return normalized, {"source": "gmon", "scale": mapping.scale, "offset": mapping.offset}
    if kind == "synthetic":
        _check_keys(doc, {"type": True, "bands": True, "per_band": False,
                          "width": False, "basis_seed": False}, "model")
        values = synthetic_band_spectrum(
            int(doc["bands"]), int(doc.get("per_band", 1)), float(doc.get("width", 0.0))
        )
        dim = len(values)
        if dim & (dim - 1):
            raise ConfigError(
                f"model: synthetic spectrum needs a power-of-two dimension, got {dim}"
            )
        gen = rng(int(doc.get("basis_seed", seed)), 1)
        return hermitian_from_spectrum(values, gen), {"source": "synthetic"}
    raise ConfigError(f"model: unknown type {kind!r}")


def _resolve_input(doc: dict, spectrum, seed: int) -> np.ndarray:
    kind = doc.get("type", "uniform-eigen")
    n = spectrum.vectors.shape[0]
    if kind == "uniform-eigen":
        _check_keys(doc, {"type": False}, "input")
        return spectrum.vectors.sum(axis=1) / math.sqrt(n)
    if kind == "haar":
        _check_keys(doc, {"type": True, "seed": False}, "input")
        gen = rng(int(doc.get("seed", seed)), 2)
        z = gen.standard_normal(n) + 1j * gen.standard_normal(n)
        return z / np.linalg.norm(z)
    if kind == "eigenstate":
        _check_keys(doc, {"type": True, "index": True}, "input")
        return spectrum.vectors[:, int(doc["index"])].copy()
    if kind == "amplitudes":
        _check_keys(doc, {"type": True, "values": True}, "input")
        amp = np.array([complex(re, im) for re, im in doc["values"]])
        return amp / np.linalg.norm(amp)
    raise ConfigError(f"input: unknown type {kind!r}")


def cmd_project(config: dict, out: Path, seed: int) -> int:
    _check_keys(config, {
        "model": True, "bands": True, "mode": False, "budget": False,
        "round_eps": False, "split_constant": False, "trajectories": False,
        "haar_samples": False, "input": False,
    }, "project")
    h, meta = _resolve_model(config["model"], seed)
    spectrum = eigh(h)

    band_doc = _check_keys(config["bands"], {"min_gap": False, "target": False}, "bands")
    if ("min_gap" in band_doc) == ("target" in band_doc):
        raise ConfigError("bands: pass exactly one of min_gap or target")
    if "min_gap" in band_doc:
        structure = detect_bands(spectrum.values, min_gap=float(band_doc["min_gap"]))
    else:
        structure = detect_bands(spectrum.values, target_bands=int(band_doc["target"]))
    check_band_assumption(spectrum.values, structure)

    mode = config.get("mode", "enumerate")
    if mode not in ("enumerate", "sample"):
        raise ConfigError(f"project: unknown mode {mode!r}")
    if "budget" not in config and "round_eps" not in config:
        raise ConfigError("project: pass budget or round_eps")

    enc = dilate_hermitian(h)
    n = enc.encoded_dim
    amp = _resolve_input(config.get("input", {}), spectrum, seed)
    state = StateVector(int(round(math.log2(n))), amp)
    tree = run_multiband(
        enc, structure, float(config.get("budget", 0.0)), state,
        mode=mode, seed=seed,
        trajectories=int(config.get("trajectories", 1)),
        split_constant=float(config.get("split_constant", 4.0)),
        round_eps=float(config["round_eps"]) if "round_eps" in config else None,
    )
    _write_json(out / "bands.json", structure.to_json())

    if mode == "sample":
        rows = []
        for t, leaf in enumerate(tree.leaves):
            rows.append([t, "".join(map(str, leaf.record.bits)), leaf.claimed_band,
                         leaf.failed])
        _write_csv(out / "records.csv",
                   ["trajectory", "record_bits", "claimed_band", "failed"], rows)
        projectors = exact_projectors(spectrum, structure)
        weights = [float(np.vdot(amp, p @ amp).real) for p in projectors]
        _write_csv(out / "band_weights.csv", ["band", "exact_weight"],
                   [[j, _fmt(w)] for j, w in enumerate(weights)])
        return 0

    _write_json(out / "tree.json", tree.to_json())
    kraus = extract_kraus(tree)
    _write_json(out / "kraus.json", {
        "completeness_residual": kraus.completeness_residual,
        "operators": [
            {
                "record": list(rec.bits),
                "claimed_band": band,
                "failed": failed,
                "matrix": matrix_to_json(op),
            }
            for rec, op, band, failed in zip(
                kraus.records, kraus.operators, kraus.claimed_bands, kraus.failed
            )
        ],
    })

    projectors = exact_projectors(spectrum, structure)
    samples = int(config.get("haar_samples", 32))
    proxy = channel_distance(kraus, projectors, samples=samples, seed=seed)
    count = structure.band_count
    bound = (4.0 * count * math.log2(count) * tree.round_eps) if count > 1 else 0.0
    rows = [["distance_proxy", _fmt(proxy)],
            ["bound_4_L_log2L_eps", _fmt(bound)],
            ["round_eps", _fmt(tree.round_eps)],
            ["degree", tree.degree],
            ["queries", tree.query_count],
            ["query_formula", feedforward_query_count(count, tree.degree)]]
    _write_csv(out / "distance.csv", ["quantity", "value"], rows)
    return 0 if (count == 1 or proxy <= bound) else 1


def cmd_baselines(config: dict, out: Path, seed: int) -> int:
    _check_keys(config, {
        "Ls": True, "trials": False, "per_band": False, "filter": False,
        "adiabatic_min_gap": False, "adiabatic_eps": False,
    }, "baselines")
    band_counts = [int(v) for v in config["Ls"]]
    if not band_counts:
        raise ConfigError("baselines: Ls must be nonempty")
    trials = int(config.get("trials", 10000))
    per_band = int(config.get("per_band", 2))
    filt_doc = _check_keys(config.get("filter", {}), {"delta": False, "eps": False},
                           "baselines.filter")
    delta = float(filt_doc.get("delta", 0.2))
    eps = float(filt_doc.get("eps", 1e-3))
    degree = heaviside_filter(FilterSpec(0.5, delta, eps)).degree
    min_gap = float(config.get("adiabatic_min_gap", 0.1))
    ad_eps = float(config.get("adiabatic_eps", 1e-2))

    rows = []
    for count in band_counts:
        dim = count * per_band
        if dim & (dim - 1):
            raise ConfigError(
                f"baselines: L={count} with per_band={per_band} is not a "
                "power-of-two dimension"
            )
        values = synthetic_band_spectrum(count, per_band, width=0.01)
        gen = rng(seed, count)
        h = hermitian_from_spectrum(values, gen)
        spectrum = eigh(h)
        structure = detect_bands(spectrum.values, target_bands=count)
        walk = random_walk_success(structure, spectrum, trials, seed)
        rows.append([
            count,
            feedforward_query_count(count, degree),
            _fmt(walk.success_rate),
            _fmt(walk.stderr),
            _fmt(prob_projection_depth(np.full(count, 1.0 / count), "amplify")),
            _fmt(adiabatic_time_estimate(per_band, min_gap, ad_eps)),
        ])
    _write_csv(
        out / "baselines.csv",
        ["L", "feedforward_queries", "random_walk_success", "walk_stderr",
         "prob_projection_depth_amplify", "adiabatic_time_estimate"],
        rows,
    )
    return 0


def cmd_bosehubbard(config: dict, out: Path, seed: int) -> int:
    _check_keys(config, {"model": False, "margin": False, "min_gap_fraction": False,
                         "perturb_seed": False}, "bosehubbard")
    model = GmonModel.from_json(config["model"]) if "model" in config else default_model()
    if "perturb_seed" in config:
        model = model.perturbed(int(config["perturb_seed"]))
    margin = float(config.get("margin", 0.1))
    gap_fraction = float(config.get("min_gap_fraction", 0.5))

    h0 = build_h0(model)
    h1 = build_h1(model)
    labeling = band_labels(model)
    normalized, mapping = normalize_for_qsvt(h0 + h1, margin)
    spectrum = eigh(normalized)
    structure = detect_bands(spectrum.values, min_gap=gap_fraction * model.eta * mapping.scale)

    _write_json(out / "model.json", model.to_json())
    _write_json(out / "h0.json", matrix_to_json(h0))
    _write_json(out / "h1.json", matrix_to_json(h1))
    from .bosehubbard import fock_occupations

    occ = fock_occupations(model)
    _write_csv(out / "labels.csv", ["index", "occupations", "band"],
               [[i, "".join(map(str, occ[i])), int(labeling.labels[i])]
                for i in range(model.dimension)])
    _write_csv(out / "spectrum.csv", ["index", "normalized_energy"],
               [[i, _fmt(v)] for i, v in enumerate(spectrum.values)])
    _write_json(out / "bands.json", structure.to_json())
    return 0


def cmd_verify(numbers, out: Path | None) -> int:
    from .verify import run_criteria

    results = run_criteria(numbers)
    width = max(len(r.title) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.ident:>2} {r.title:<{width}} {r.detail}")
    if out is not None:
        _write_csv(out / "verify.csv", ["criterion", "title", "passed", "detail"],
                   [[r.ident, r.title, r.passed, r.detail.replace(",", ";")] for r in results])
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fqsvt",
        description="Feedforward singular-value-transformation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("phases", "project", "baselines", "bosehubbard"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)
    v = sub.add_parser("verify")
    v.add_argument("--criteria", default="", help="comma-separated subset, e.g. 1,4,8")
    v.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    try:
        if args.command == "verify":
            numbers = [int(tok) for tok in args.criteria.split(",") if tok.strip()]
            out = None
            if args.out is not None:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
            return cmd_verify(numbers or None, out)
        config = _load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        handler = {
            "phases": cmd_phases,
            "project": cmd_project,
            "baselines": cmd_baselines,
            "bosehubbard": cmd_bosehubbard,
        }[args.command]
        return handler(config, out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
