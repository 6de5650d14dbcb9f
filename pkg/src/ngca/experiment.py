"""Config-driven experiments: build an instance, run the solvers, write a report."""
from __future__ import annotations

import copy
import hashlib
import json
import os
import time
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import moment_toolkit as mt
from .cumulant_baseline import cumulant_kernel, write_spectrum_csv
from .deflation_driver import FullConfig, full_alg
from .errors import ConfigInvalid
from .instance_model import NonGaussianLaw, NgcaInstance, draw_samples, isotropize, synthesize_instance
from .io import write_matrix_csv
from .sphere_descent import DescentConfig, write_trace_csv
from .subspace_algebra import Subspace, orthogonal_complement

SEED_ENV = "NGCA_SEED"
_DESCENT_KEYS = {"eta", "eps1", "eps2", "max_iters", "fd_step_h", "grad_repeats", "patience"}
_FULL_KEYS = {"noise_t_prime", "restarts_per_level", "D_hint", "K_hint", "eps_target"}


def load_schema() -> dict:
    return json.loads(resources.files("ngca").joinpath("schema/experiment.schema.json").read_text())


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict

    @property
    def n(self) -> int:
        return self.raw["instance"]["n"]

    @property
    def p(self) -> int:
        return self.raw["instance"]["p"]

    @property
    def r(self) -> int:
        return self.raw["instance"].get("r", 4)

    @property
    def laws(self) -> list[NonGaussianLaw]:
        return [NonGaussianLaw(l["kind"], tuple(l.get("params", ()))) for l in self.raw["instance"]["laws"]]

    @property
    def N(self) -> int:
        return self.raw["sampling"]["N"]

    @property
    def seed(self) -> int:
        return self.raw["sampling"]["seed"]

    @property
    def method(self) -> str:
        return self.raw.get("method", "entropy_descent")

    @property
    def solver(self) -> dict:
        return self.raw.get("solver", {})

    @property
    def cumulant(self) -> dict:
        return {"orders": [3, 4], "kernel_tol": 0.05, **self.raw.get("cumulant", {})}

    @property
    def outputs(self) -> dict:
        return {"directory": "runs/out", "formats": ["json", "csv"], **self.raw.get("outputs", {})}

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.raw, sort_keys=True).encode()).hexdigest()


def validate_config(raw: dict) -> ExperimentConfig:
    try:
        jsonschema.Draft202012Validator(load_schema()).validate(raw)
    except jsonschema.ValidationError as err:
        raise ConfigInvalid(err.message, tuple(err.absolute_path)) from None
    inst = raw["instance"]
    if inst["p"] > inst["n"]:
        raise ConfigInvalid("p must not exceed n", ("instance", "p"))
    if len(inst["laws"]) != inst["n"] - inst["p"]:
        raise ConfigInvalid(f"need n - p = {inst['n'] - inst['p']} laws, got {len(inst['laws'])}",
                            ("instance", "laws"))
    try:
        for i, law in enumerate(inst["laws"]):
            NonGaussianLaw(law["kind"], tuple(law.get("params", ())))
    except ValueError as err:
        raise ConfigInvalid(str(err), ("instance", "laws", i)) from None
    return ExperimentConfig(raw)


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ConfigInvalid(f"not valid JSON: {err}") from None
    if isinstance(raw, dict) and os.environ.get(SEED_ENV):
        raw = copy.deepcopy(raw)
        try:
            raw.setdefault("sampling", {})["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigInvalid(f"{SEED_ENV} must be an integer", ("sampling", "seed")) from None
    if not isinstance(raw, dict):
        raise ConfigInvalid("top level must be an object")
    return validate_config(raw)


def full_config_for(cfg: ExperimentConfig, inst: NgcaInstance | None = None) -> FullConfig:
    solver = cfg.solver
    dkw = {k: v for k, v in solver.items() if k in _DESCENT_KEYS}
    fkw = {k: v for k, v in solver.items() if k in _FULL_KEYS}
    if inst is not None and inst.D is not None:
        fkw.setdefault("D_hint", inst.D)
        fkw.setdefault("K_hint", inst.subgaussian_K)
    return FullConfig(descent=DescentConfig(**dkw), r=cfg.r, **fkw)


def projector_distance(a: Subspace, b: Subspace) -> float:
    """||P_a - P_b||_F; defined for unequal dimensions (unlike subspace_distance)."""
    return float(np.linalg.norm(a.projector() - b.projector(), "fro"))


def _gap_report(x: np.ndarray, basis: np.ndarray, D: float, r: int) -> list[dict]:
    out = []
    for j in range(basis.shape[1]):
        rep = mt.detect_gap(mt.empirical_moments(x @ basis[:, j], r), D)
        out.append({"k_star": rep.k_star, "gap": rep.gap, "all_gaps": {str(k): v for k, v in rep.all_gaps.items()}})
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


@dataclass
class RunReport:
    body: dict
    timing: dict
    exit_code: int

    def distance(self, method: str) -> float | None:
        return self.body["methods"].get(method, {}).get("distance")


def run_experiment(config_path, out_dir=None) -> RunReport:
    """Run the configured methods and write report.json plus CSV artefacts."""
    cfg = load_config(config_path)
    return run_config(cfg, out_dir)


def run_config(cfg: ExperimentConfig, out_dir=None) -> RunReport:
    out = Path(out_dir or cfg.outputs["directory"])
    formats = set(cfg.outputs["formats"])
    out.mkdir(parents=True, exist_ok=True)
    ss_inst, ss_draw, ss_solve = np.random.SeedSequence(cfg.seed).spawn(3)
    timing = {}

    t0 = time.perf_counter()
    inst = synthesize_instance(cfg.n, cfg.p, cfg.laws, cfg.r, np.random.default_rng(ss_inst))
    samples, _ = isotropize(draw_samples(inst, cfg.N, np.random.default_rng(ss_draw)))
    timing["setup_seconds"] = time.perf_counter() - t0
    gamma = inst.gamma
    ng_true = inst.nongaussian
    D = inst.D if inst.D is not None else 0.5

    methods = {}
    invariants = []
    if cfg.method in ("entropy_descent", "both"):
        fcfg = full_config_for(cfg, inst)
        t0 = time.perf_counter()
        res = full_alg(samples, fcfg, np.random.default_rng(ss_solve))
        timing["entropy_descent_seconds"] = time.perf_counter() - t0
        V = res.nongaussian_subspace
        dirs = res.gaussian_directions
        ortho_err = float(np.max(np.abs(dirs.T @ dirs - np.eye(dirs.shape[1])))) if dirs.size else 0.0
        invariants += [
            {"name": "entropy_descent.orthonormal_directions", "value": ortho_err, "ok": ortho_err <= 1e-8},
            {"name": "entropy_descent.dimension_accounting", "value": dirs.shape[1] + V.dim,
             "ok": dirs.shape[1] + V.dim == cfg.n},
        ]
        methods["entropy_descent"] = {
            "nongaussian_basis": V.basis,
            "dim": V.dim,
            "n_gaussian_found": res.n_gaussian,
            "distance": projector_distance(V, ng_true),
            "equal_rank": V.dim == ng_true.dim,
            "target": fcfg.eps_target,
            "target_met": bool(V.dim == ng_true.dim and projector_distance(V, ng_true) <= fcfg.eps_target),
            "result": res.to_dict(),
            "gap_report": _gap_report(samples.data, V.basis, D, cfg.r),
            "config": {"eta": fcfg.descent.eta, "eps1": fcfg.descent.eps1, "eps2": fcfg.descent.eps2,
                       "max_iters": fcfg.descent.max_iters, "restarts_per_level": fcfg.restarts_per_level,
                       "noise_t_prime": fcfg.noise_t_prime, "D_hint": fcfg.D_hint, "K_hint": fcfg.K_hint},
        }
        if "csv" in formats:
            (out / "traces").mkdir(exist_ok=True)
            (out / "subspaces").mkdir(exist_ok=True)
            for lv in res.levels:
                if lv.outcome is not None:
                    write_trace_csv(lv.outcome, out / "traces" / f"entropy_level{lv.level}.csv",
                                    gamma=gamma, lift=lv.level_basis)
            write_matrix_csv(V.basis, out / "subspaces" / "entropy_nongaussian.csv")
            write_matrix_csv(dirs, out / "subspaces" / "entropy_gaussian_directions.csv")

    if cfg.method in ("cumulant", "both"):
        cc = cfg.cumulant
        t0 = time.perf_counter()
        g_est, rep = cumulant_kernel(samples, tuple(cc["orders"]), cc["kernel_tol"])
        timing["cumulant_seconds"] = time.perf_counter() - t0
        V = orthogonal_complement(g_est)
        methods["cumulant"] = {
            "nongaussian_basis": V.basis,
            "gaussian_basis": g_est.basis,
            "dim": V.dim,
            "distance": projector_distance(V, ng_true),
            "equal_rank": V.dim == ng_true.dim,
            "spectrum": rep.to_dict(),
            "gap_report": _gap_report(samples.data, V.basis, D, cfg.r),
        }
        invariants.append({"name": "cumulant.psd", "value": float(rep.eigvals[0]), "ok": rep.eigvals[0] >= -1e-8})
        if "csv" in formats:
            (out / "traces").mkdir(exist_ok=True)
            (out / "subspaces").mkdir(exist_ok=True)
            write_spectrum_csv(rep, out / "traces" / "cumulant_spectrum.csv")
            write_matrix_csv(V.basis, out / "subspaces" / "cumulant_nongaussian.csv")

    if "csv" in formats:
        (out / "subspaces").mkdir(exist_ok=True)
        write_matrix_csv(gamma.basis, out / "subspaces" / "gamma_true.csv")

    comparison = None
    if len(methods) == 2:
        comparison = {m: {"distance": v["distance"], "dim": v["dim"]} for m, v in methods.items()}
        comparison["winner"] = min(methods, key=lambda m: methods[m]["distance"])

    # distances must be recomputable from the serialized bases
    for name, m in methods.items():
        basis = np.array(json.loads(json.dumps(_jsonable(m["nongaussian_basis"])))).reshape(cfg.n, -1)
        again = projector_distance(Subspace(basis, check=False), ng_true)
        invariants.append({"name": f"{name}.distance_recomputable", "value": abs(again - m["distance"]),
                           "ok": abs(again - m["distance"]) <= 1e-10})

    body = {
        "environment": {"seed": cfg.seed, "version": __version__, "config_hash": cfg.digest(),
                        "numpy": np.__version__},
        "config": cfg.raw,
        "instance": inst.to_dict(),
        "methods": methods,
        "comparison": comparison,
        "invariants": invariants,
        "volatile_fields": "timing.json",
    }
    body = _jsonable(body)
    exit_code = 0 if all(i["ok"] for i in invariants) else 2
    body["status"] = "ok" if exit_code == 0 else "invariant_violation"
    if "json" in formats:
        (out / "report.json").write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")
        (out / "timing.json").write_text(json.dumps(_jsonable(timing), sort_keys=True, indent=2) + "\n")
    return RunReport(body=body, timing=timing, exit_code=exit_code)


def generate_instance(spec_path, out_dir) -> dict:
    """Write instance.json (with ground truth) and, if sampling is given, samples.bin."""
    from .io import write_binary

    raw = json.loads(Path(spec_path).read_text())
    raw.setdefault("schema_version", 1)
    raw.setdefault("sampling", {"N": 1000, "seed": 0})
    cfg = validate_config(raw)
    ss_inst, ss_draw, _ = np.random.SeedSequence(cfg.seed).spawn(3)
    inst = synthesize_instance(cfg.n, cfg.p, cfg.laws, cfg.r, np.random.default_rng(ss_inst))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    info = _jsonable(inst.to_dict())
    info["subgaussian_K"] = inst.subgaussian_K
    (out / "instance.json").write_text(json.dumps(info, sort_keys=True, indent=2) + "\n")
    s = draw_samples(inst, cfg.N, np.random.default_rng(ss_draw))
    s = replace(s, seed=cfg.seed)
    write_binary(s, out / "samples.bin")
    return info
