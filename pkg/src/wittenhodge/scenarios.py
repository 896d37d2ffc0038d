"""Scenario files, the analysis pipeline and JSON reports.

A scenario names a mesh (generator parameters or a mesh file), the values
of s, the analyses to run and optional tolerance overrides.  Running it
yields a :class:`ScenarioReport`: every numeric check carries its value,
tolerance and margin, and the summary is the logical AND of the checks.
Reports are deterministic except for the ``timing`` block.
"""

from __future__ import annotations

import json
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import field as dc_field
from pathlib import Path

import numpy as np

from . import cohomology as co
from . import decomp, radial, spectral
from .complex import reference_betti
from .meshes import MESH_SCHEMA, ParameterError, generate_mesh, refine_params
from .errors import ValidationError
from .problem import load_problem
from .schemas import validate as validate_schema
from .witten import D, N, PARITIES, green_probe, nilpotency_defect

SCENARIO_SCHEMA = "wittenhodge.scenario/1"
REPORT_SCHEMA = "wittenhodge.report/1"

ANALYSES = ("dims", "refinement", "isomorphism", "duality", "euler", "sweep",
            "decomposition", "split", "angles", "green", "nilpotency")

# name: (default, strict, lower bound, upper bound)
TOLERANCES = {
    "rho_min": (100.0, 100.0, 10.0, 1e6),
    "tau_abs": (1e-7, 1e-7, 1e-12, 1e-4),
    "tau_empty": (1e-4, 1e-4, 1e-7, 1e-2),
    "lambda_empty_min": (1e-3, 1e-3, 0.0, 1.0),
    "reconstruction": (1e-9, 1e-11, 1e-15, 1e-6),
    "orthogonality": (1e-9, 1e-11, 1e-15, 1e-6),
    "poisson": (1e-9, 1e-10, 1e-15, 1e-6),
    "green": (1e-12, 1e-13, 1e-16, 1e-8),
    "cross_gram": (1e-9, 1e-10, 1e-15, 1e-6),
    "hn_hd_angle": (1e-3, 1e-3, 0.0, 0.1),
    "split_span": (1e-6, 1e-6, 1e-12, 1e-3),
    "angle_margin": (1e-3, 1e-3, 0.0, 0.1),
    "nilpotency_ratio": (0.75, 0.75, 0.1, 1.0),
    "oracle_sigfigs": (2, 2, 1, 6),
}
PROFILES = ("default", "strict")


def tolerance_profile(name="default", overrides=None):
    if name not in PROFILES:
        raise ValidationError(f"unknown tolerance profile {name!r}")
    col = PROFILES.index(name)
    tol = {k: v[col] for k, v in TOLERANCES.items()}
    for k, v in (overrides or {}).items():
        if k not in TOLERANCES:
            raise ValidationError(f"unknown tolerance {k!r}")
        lo, hi = TOLERANCES[k][2:]
        if not (isinstance(v, (int, float)) and lo <= v <= hi):
            raise ValidationError(f"tolerance {k} outside [{lo}, {hi}]",
                                  value=v)
        tol[k] = v
    return tol


# ---------------------------------------------------------------------------
# scenario


@dataclass
class Scenario:
    id: str
    mesh: dict
    s_values: list
    analyses: list
    order: int | None = None
    field: dict | None = None
    bc: list = dc_field(default_factory=lambda: ["N", "D"])
    tolerances: dict = dc_field(default_factory=dict)
    sweep_s_values: list = dc_field(default_factory=list)
    angle_s_values: list = dc_field(default_factory=list)
    angle_mesh: dict | None = None
    samples: int = 20
    ladder_levels: int = 3
    outputs: dict = dc_field(default_factory=dict)
    base_dir: str = "."

    def echo(self):
        d = {k: getattr(self, k) for k in (
            "id", "mesh", "s_values", "analyses", "order", "field", "bc",
            "tolerances", "sweep_s_values", "angle_s_values", "angle_mesh",
            "samples", "ladder_levels", "outputs")}
        return _jsonable(d)


def parse_scenario(doc, base_dir="."):
    """Validate a scenario document; raises :class:`ValidationError`."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be a JSON object")
    if doc.get("schema") != SCENARIO_SCHEMA:
        raise ValidationError("unsupported scenario schema",
                              schema=doc.get("schema"), expected=SCENARIO_SCHEMA)
    for key in ("id", "mesh", "s_values", "analyses"):
        if key not in doc:
            raise ValidationError(f"scenario is missing {key!r}")
    validate_schema(doc, "scenario")
    known = {"schema", "id", "mesh", "s_values", "analyses", "order", "field",
             "bc", "tolerances", "sweep_s_values", "angle_s_values",
             "angle_mesh", "samples", "ladder_levels", "outputs"}
    extra = sorted(set(doc) - known)
    if extra:
        raise ValidationError("unknown scenario keys", keys=extra)
    s_values = doc["s_values"]
    if not isinstance(s_values, list) or not s_values:
        raise ValidationError("s_values must be a nonempty list")
    for s in s_values + doc.get("sweep_s_values", []) + doc.get("angle_s_values", []):
        if not isinstance(s, (int, float)) or not math.isfinite(s):
            raise ValidationError("s values must be finite numbers", value=s)
    bad = [a for a in doc["analyses"] if a not in ANALYSES]
    if bad:
        raise ValidationError("unknown analyses", analyses=bad)
    bcs = doc.get("bc", ["N", "D"])
    if not set(bcs) <= {"N", "D"} or not bcs:
        raise ValidationError("bc must be a nonempty subset of ['N', 'D']")
    mesh = doc["mesh"]
    if not isinstance(mesh, dict) or (("generator" in mesh) == ("path" in mesh)):
        raise ValidationError("mesh needs exactly one of 'generator' or 'path'")
    if "sweep" in doc["analyses"]:
        sv = doc.get("sweep_s_values", [])
        if 0 not in sv or sum(1 for s in sv if s != 0) < 3:
            raise ValidationError(
                "sweep needs sweep_s_values with 0 and three nonzero values")
    tolerance_profile("default", doc.get("tolerances"))
    return Scenario(
        id=str(doc["id"]), mesh=mesh, s_values=[float(s) for s in s_values],
        analyses=list(doc["analyses"]), order=doc.get("order"),
        field=doc.get("field"), bc=list(bcs),
        tolerances=dict(doc.get("tolerances", {})),
        sweep_s_values=[float(s) for s in doc.get("sweep_s_values", [])],
        angle_s_values=[float(s) for s in doc.get("angle_s_values", [])],
        angle_mesh=doc.get("angle_mesh"),
        samples=int(doc.get("samples", 20)),
        ladder_levels=int(doc.get("ladder_levels", 3)),
        outputs=dict(doc.get("outputs", {})), base_dir=str(base_dir))


def load_scenario(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(doc, base_dir=path.parent)


def _power_perm(perm, e):
    perm = np.asarray(perm)
    out = np.arange(len(perm))
    for _ in range(e):
        out = perm[out]
    return out


def mesh_document(sc, mesh=None):
    """Materialize the scenario's mesh document with order and field applied."""
    mesh = sc.mesh if mesh is None else mesh
    if "generator" in mesh:
        params = dict(mesh["generator"])
        kind = params.pop("kind", None)
        if sc.order is not None:
            params["order"] = sc.order
        try:
            doc = generate_mesh(kind, **params)
        except (ParameterError, TypeError) as exc:
            raise ValidationError(f"bad generator parameters: {exc}") from exc
    else:
        path = Path(sc.base_dir) / mesh["path"]
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read mesh {path}: {exc}") from exc
        if sc.order is not None and isinstance(doc, dict) and "action" in doc:
            have = int(doc["action"]["order"])
            if have % sc.order:
                raise ValidationError("requested order does not divide the "
                                      "mesh action order", order=sc.order,
                                      mesh_order=have)
            doc["action"] = {"order": sc.order, "vertex_perm": _power_perm(
                doc["action"]["vertex_perm"], have // sc.order).tolist()}
    if sc.field is not None and isinstance(doc, dict):
        doc["field"] = {**doc.get("field", {}), **sc.field}
    return doc


def _ladder(sc, levels):
    if "generator" not in sc.mesh:
        raise ValidationError("refinement ladders need a generator mesh")
    gen = dict(sc.mesh["generator"])
    kind = gen.pop("kind")
    out = []
    for _ in range(levels):
        out.append({"generator": {"kind": kind, **gen}})
        gen = refine_params(kind, gen)
    return out


# ---------------------------------------------------------------------------
# report


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


@dataclass
class ScenarioReport:
    schema: str
    scenario: dict
    seed: int
    tol_profile: str
    results: dict
    checks: list
    summary: dict
    timing: dict

    @property
    def passed(self):
        return bool(self.summary.get("passed"))

    @property
    def exit_code(self):
        return int(self.summary.get("exit_code", 3))

    def as_dict(self):
        return {"schema": self.schema, "scenario": self.scenario,
                "seed": self.seed, "tol_profile": self.tol_profile,
                "results": self.results, "checks": self.checks,
                "summary": self.summary, "timing": self.timing}

    def to_json(self, timing=True):
        d = self.as_dict()
        if not timing:
            d.pop("timing")
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        if d.get("schema") != REPORT_SCHEMA:
            raise ValidationError("unsupported report schema")
        validate_schema(d, "report")
        return cls(**{k: d[k] for k in ("schema", "scenario", "seed",
                                        "tol_profile", "results", "checks",
                                        "summary", "timing")})


class _Recorder:
    def __init__(self):
        self.checks = []
        self.results = {}
        self.timing = {}
        self.errors = []

    def check(self, name, value, tolerance, op="<="):
        """Record a check; ``op`` is ``<=``, ``>=``, ``==`` or ``in``."""
        if op == "<=":
            ok = value is not None and value <= tolerance
            margin = tolerance - value if value is not None else None
        elif op == ">=":
            ok = value is not None and value >= tolerance
            margin = value - tolerance if value is not None else None
        elif op == "==":
            ok = value == tolerance
            margin = 0 if ok else None
        elif op == "in":
            lo, hi = tolerance
            ok = value is not None and lo < value < hi
            margin = min(value - lo, hi - value) if value is not None else None
        else:
            raise ValueError(op)
        self.checks.append(_jsonable({"name": name, "value": value,
                                      "tolerance": tolerance, "op": op,
                                      "margin": margin, "passed": bool(ok)}))
        return ok


class _Phase:
    def __init__(self, rec, name):
        self.rec, self.name = rec, name

    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, et, ev, tb):
        self.rec.timing[self.name] = round(time.perf_counter() - self.t, 6)
        if ev is None:
            return False
        expected = isinstance(ev, (decomp.DecompositionError,
                                   decomp.AmbiguousKernel,
                                   spectral.ConvergenceError, ValidationError,
                                   ArithmeticError, ValueError))
        self.rec.errors.append(_jsonable({
            "phase": self.name, "type": type(ev).__name__,
            "message": str(ev), "internal": not expected,
            "detail": getattr(ev, "detail", None) or getattr(ev, "verdicts", None),
            "traceback": None if expected else traceback.format_exception_only(et, ev),
        }))
        self.rec.check(f"{self.name}:completed", False, True, "==")
        return True


# ---------------------------------------------------------------------------
# analyses


def _kernel_opts(tol):
    return {"rho_min": tol["rho_min"], "tau_abs": tol["tau_abs"],
            "tau_empty": tol["tau_empty"]}


def _expected_dims(problem, s, cache):
    if s == 0.0:
        if "classical" not in cache:
            cache["classical"] = co.classical_reference(problem.complex)
        return cache["classical"]
    if "fixed" not in cache:
        cache["fixed"] = co.fixed_point_reference(
            problem.complex, problem.action, problem.field,
            problem.fixed_vertices).as_tuple()
    return cache["fixed"]


def _analysis_dims(rec, sc, problem, tol, cache):
    out = []
    for s in sc.s_values:
        xd = co.x_cohomology_dims(problem.bundle(s), **_kernel_opts(tol))
        expect = _expected_dims(problem, s, cache)
        row = {"s": s, "dims": dict(xd.dims), "expected": list(expect),
               "verdicts": xd.verdicts, "kernels": xd.kernels}
        rec.check(f"dims[s={s}]:clean", xd.clean, True, "==")
        rec.check(f"dims[s={s}]", list(xd.as_tuple()), list(expect), "==")
        for key in co.KEYS:
            if xd.dims[key] == 0 and s != 0.0:
                lam = xd.kernels[key]["eigenvalues"][0]
                rec.check(f"dims[s={s}]:{key}:lambda_min", lam,
                          tol["lambda_empty_min"], ">=")
        if s == 0.0:
            row["by_degree"] = _degree_rows(rec, problem, tol)
        out.append(row)
    rec.results["dims"] = out


def _degree_rows(rec, problem, tol):
    b = problem.bundle(0.0)
    oracle = {"N": reference_betti(problem.complex),
              "D": reference_betti(problem.complex, relative=True)}
    rows = {}
    for bc in (N, D):
        by = [0] * (b.n + 1)
        for p in PARITIES:
            hb = decomp.harmonic_fields(b, bc, p, **_kernel_opts(tol))
            if hb.dim is None:
                continue
            for k, v in decomp.degree_dimensions(b, hb).items():
                by[k] = v
        rows[bc.value] = {"computed": by, "oracle": oracle[bc.value]}
        rec.check(f"dims[s=0]:{bc.value}:by_degree", by, oracle[bc.value], "==")
    return rows


def _analysis_refinement(rec, sc, problem, tol, cache):
    """Dimensions on one refinement of the mesh must not change."""
    finer = _ladder(sc, 2)[1]
    fp = load_problem(mesh_document(sc, finer))
    rows = []
    for s in sc.s_values:
        a = co.x_cohomology_dims(problem.bundle(s), **_kernel_opts(tol))
        bdim = co.x_cohomology_dims(fp.bundle(s), **_kernel_opts(tol))
        rows.append({"s": s, "coarse": a.dims, "fine": bdim.dims,
                     "fine_verdicts": bdim.verdicts,
                     "fine_lambda_min": {k: bdim.kernels[k]["eigenvalues"][0]
                                         for k in co.KEYS}})
        rec.check(f"refinement[s={s}]:clean", bdim.clean, True, "==")
        rec.check(f"refinement[s={s}]", list(bdim.as_tuple()),
                  list(a.as_tuple()), "==")
    rec.results["refinement"] = {"mesh": finer, "rows": rows}


def _analysis_isomorphism(rec, sc, problem, tol, cache):
    out = []
    for s in sc.s_values:
        if s == 0.0:
            continue
        v = co.verify_isomorphisms(problem, s, sc.id, **_kernel_opts(tol))
        out.append(v.as_dict())
        rec.check(f"isomorphism[s={s}]", v.passed, True, "==")
    rec.results["isomorphism"] = out


def _analysis_duality(rec, sc, problem, tol, cache):
    n = problem.dim
    out = []
    for s in sc.s_values:
        xd = co.x_cohomology_dims(problem.bundle(s), **_kernel_opts(tol))
        for p in PARITIES:
            name = ("even", "odd")[p]
            dual = ("even", "odd")[(n - p) % 2]
            lhs, rhs = xd.dims[f"{name}_D"], xd.dims[f"{dual}_N"]
            out.append({"s": s, "parity": name, "D": lhs, "N_dual": rhs})
            rec.check(f"duality[s={s}]:{name}", lhs, rhs, "==")
    rec.results["duality"] = out


def _analysis_euler(rec, sc, problem, tol, cache):
    eu = co.euler_identities(problem)
    for name, lhs, rhs, _ in eu.rows:
        rec.check(f"euler:{name}", lhs, rhs, "==")
    rec.results["euler"] = eu.rows


def _analysis_sweep(rec, sc, problem, tol, cache):
    table = co.s_sweep_dims(problem, sc.sweep_s_values, **_kernel_opts(tol))
    for row in table.rows:
        expect = table.expected_zero if row["s"] == 0.0 else table.expected_nonzero
        rec.check(f"sweep[s={row['s']}]:clean", row["clean"], True, "==")
        rec.check(f"sweep[s={row['s']}]", row["dims"], list(expect), "==")
    rec.check("sweep:constant_for_nonzero_s", table.constant_nonzero, True, "==")
    rec.results["sweep"] = {"rows": table.rows,
                            "expected_s0": list(table.expected_zero),
                            "expected_nonzero": list(table.expected_nonzero)}


def _analysis_decomposition(rec, sc, problem, tol, cache, seed):
    rng = np.random.default_rng(seed)
    out = []
    for s in sc.s_values:
        b = problem.bundle(s)
        for p in PARITIES:
            rec_max = orth_max = 0.0
            diag = {}
            for _ in range(sc.samples):
                omega = rng.standard_normal(b.size(p))
                ft = decomp.five_term_decompose(b, omega, p)
                rec_max = max(rec_max, ft.reconstruction)
                orth_max = max(orth_max, ft.orthogonality)
                for k, v in ft.diagnostics.items():
                    if v is not None and np.isfinite(v):
                        diag[k] = max(diag.get(k, 0.0), v)
            tag = f"decomposition[s={s},{('even', 'odd')[p]}]"
            rec.check(f"{tag}:reconstruction", rec_max, tol["reconstruction"])
            rec.check(f"{tag}:orthogonality", orth_max, tol["orthogonality"])
            pois = {}
            for bc in sc.bc:
                res = _poisson_probe(b, bc, p, rng)
                pois[bc] = res
                rec.check(f"{tag}:poisson[{bc}]", res, tol["poisson"])
            out.append({"s": s, "parity": p, "samples": sc.samples,
                        "reconstruction": rec_max, "orthogonality": orth_max,
                        "poisson": pois, "diagnostics": diag})
    rec.results["decomposition"] = out


def _poisson_probe(b, bc, p, rng):
    hb = decomp.harmonic_fields(b, bc, p).require()
    M = b.M(p, bc)
    H = b.restrict(p, hb.basis, bc)
    eta = rng.standard_normal(b.size(p, bc))
    eta = eta - H @ (H.T @ M @ eta)
    S, _ = decomp.stiffness(b, bc, p)
    w = decomp.solve_poisson(b, bc, eta, p)
    return float(np.linalg.norm(S @ w - M @ eta)
                 / max(np.linalg.norm(M @ eta), 1e-300))


def _analysis_split(rec, sc, problem, tol, cache):
    out = []
    for s in sc.s_values:
        b = problem.bundle(s)
        xs, evidence = co.x_split_dims(problem, s)
        for p in PARITIES:
            name = ("even", "odd")[p]
            ih, bhn, bhd = xs[p]
            cross = evidence[p]["cross_gram_max"]
            rec.check(f"split[s={s},{name}]:cross_gram", cross, tol["cross_gram"])
            span = max(evidence[p]["N"]["span_angle"],
                       evidence[p]["D"]["span_angle"])
            rec.check(f"split[s={s},{name}]:method_span_angle", span,
                      tol["split_span"])
            row = {"s": s, "parity": name, "IH": ih, "BH_N": bhn, "BH_D": bhd,
                   "evidence": evidence[p]}
            hN = decomp.harmonic_fields(b, N, p).basis
            hD = decomp.harmonic_fields(b, D, p).basis
            if problem.has_boundary and hN.shape[1] and hD.shape[1]:
                ang = decomp.principal_angles(hN, hD, b.M(p))
                row["min_angle_HN_HD"] = float(ang.min())
                rec.check(f"split[s={s},{name}]:HN_cap_HD_angle",
                          float(ang.min()), tol["hn_hd_angle"], ">=")
            out.append(row)
    rec.results["split"] = out


def _analysis_angles(rec, sc, problem, tol, cache):
    if not problem.has_boundary:
        raise ValidationError("angle analyses need a manifold with boundary")
    margin = tol["angle_margin"]
    gen = sc.mesh.get("generator", {})
    disk = gen.get("kind") == "disk"
    rows = []
    for s in sc.s_values:
        if s == 0.0:
            continue
        reps = decomp.angles_at(problem.bundle(s), margin)
        for p, rep in sorted(reps.items()):
            row = {"s": s, "parity": p, **rep.as_dict()}
            for i, a in enumerate(rep.angles):
                rec.check(f"angles[s={s},{p},{i}]:acute", a,
                          [margin, math.pi / 2 - margin], "in")
            if disk and p == 0 and len(rep.angles) == 1:
                radius = float(gen.get("radius", 1.0))
                oracle = radial.duality_angle_ode(s, radius)
                row["oracle"] = oracle
                row["oracle_closed_form"] = radial.duality_angle_closed(s, radius)
                half_unit = 0.5 * 10.0 ** (math.floor(math.log10(abs(oracle)))
                                           - tol["oracle_sigfigs"] + 1)
                rec.check(f"angles[s={s}]:radial_oracle",
                          abs(rep.angles[0] - oracle), half_unit)
            rows.append(row)
    result = {"rows": rows}
    if sc.angle_s_values:
        mesh = sc.angle_mesh or sc.mesh
        sp = problem if mesh == sc.mesh else load_problem(mesh_document(sc, mesh))
        entries = decomp.angle_sweep(sp, sc.angle_s_values, margin)
        for e in entries:
            if e.s != 0.0:
                rec.check(f"angle_sweep[s={e.s}]:status", e.status, "ok", "==")
        result["sweep"] = {"mesh": mesh,
                           "entries": [e.as_dict() for e in entries]}
    rec.results["angles"] = result


def _analysis_green(rec, sc, problem, tol, cache, seed):
    out = []
    for s in sc.s_values:
        g = green_probe(problem.bundle(s), pairs=100, seed=seed)
        rec.check(f"green[s={s}]:r1", g.r1, tol["green"])
        rec.check(f"green[s={s}]:r2", g.r2, tol["green"])
        out.append({"s": s, "r1": g.r1, "r2": g.r2, "pairs": g.pairs})
    rec.results["green"] = out


def _analysis_nilpotency(rec, sc, problem, tol, cache):
    s = next((x for x in sc.s_values if x != 0.0), 1.0)
    levels = _ladder(sc, sc.ladder_levels)
    etas = {p: [] for p in PARITIES}
    full = {p: [] for p in PARITIES}
    for i, mesh in enumerate(levels):
        lp = problem if i == 0 else load_problem(mesh_document(sc, mesh))
        for p in PARITIES:
            r, f = nilpotency_defect(lp.bundle(s), p)
            etas[p].append(r)
            full[p].append(f)
    # Only the resolved defect is checked; the full operator norm carries
    # the O(1/h) commutator of the weak contraction and is reported as is.
    for p in PARITIES:
        for i in range(1, len(levels)):
            ratio = etas[p][i] / max(etas[p][i - 1], 1e-300)
            rec.check(f"nilpotency[{('even', 'odd')[p]}]:resolved_ratio[{i}]",
                      ratio, tol["nilpotency_ratio"])
    rec.results["nilpotency"] = {"s": s, "ladder": levels,
                                 "eta_resolved": etas, "eta_full": full}


_DISPATCH = {
    "dims": _analysis_dims, "refinement": _analysis_refinement,
    "isomorphism": _analysis_isomorphism, "duality": _analysis_duality,
    "euler": _analysis_euler, "sweep": _analysis_sweep,
    "split": _analysis_split, "angles": _analysis_angles,
    "nilpotency": _analysis_nilpotency,
}
_SEEDED = {"decomposition": _analysis_decomposition, "green": _analysis_green}


def validate_against_mesh(sc, problem):
    if "angles" in sc.analyses and not problem.has_boundary:
        raise ValidationError("angle analyses need a manifold with boundary",
                              scenario=sc.id)
    if ("nilpotency" in sc.analyses or "refinement" in sc.analyses) \
            and "generator" not in sc.mesh:
        raise ValidationError("refinement ladders need a generator mesh",
                              scenario=sc.id)


def run_scenario(sc, seed=0, tol_profile="default"):
    """validate, assemble and analyze; always returns a complete report.

    Validation problems raise :class:`ValidationError` (nothing to report).
    """
    rec = _Recorder()
    tol = tolerance_profile(tol_profile, sc.tolerances)
    t0 = time.perf_counter()
    doc = mesh_document(sc)
    problem = load_problem(doc)
    validate_against_mesh(sc, problem)
    rec.timing["validate"] = round(time.perf_counter() - t0, 6)
    with _Phase(rec, "assemble"):
        for s in sc.s_values:
            problem.bundle(s)
    rec.results["mesh"] = {"counts": problem.diagnostics["counts"],
                           "action": problem.diagnostics["action"],
                           "field": problem.diagnostics["field"],
                           "dim": problem.dim,
                           "has_boundary": bool(problem.has_boundary)}
    cache = {}
    for name in sc.analyses:
        with _Phase(rec, name):
            if name in _SEEDED:
                _SEEDED[name](rec, sc, problem, tol, cache, seed)
            else:
                _DISPATCH[name](rec, sc, problem, tol, cache)
    failed = [c["name"] for c in rec.checks if not c["passed"]]
    internal = any(e["internal"] for e in rec.errors)
    exit_code = 3 if internal else (1 if failed else 0)
    summary = {"passed": not failed and not rec.errors,
               "n_checks": len(rec.checks), "n_failed": len(failed),
               "failed": failed, "errors": rec.errors, "exit_code": exit_code}
    report = ScenarioReport(REPORT_SCHEMA, sc.echo(), int(seed), tol_profile,
                            _jsonable(rec.results), rec.checks,
                            _jsonable(summary), rec.timing)
    return report


# ---------------------------------------------------------------------------
# suites


def scenario_files(directory):
    return sorted(Path(directory).glob("*.scenario.json"))


def _run_file(args):
    path, seed, profile = args
    t0 = time.perf_counter()
    try:
        sc = load_scenario(path)
        rep = run_scenario(sc, seed, profile)
        return {"file": Path(path).name, "id": sc.id, "exit_code": rep.exit_code,
                "n_failed": rep.summary["n_failed"],
                "n_checks": rep.summary["n_checks"],
                "report": rep.to_json(), "seconds": time.perf_counter() - t0}
    except ValidationError as exc:
        return {"file": Path(path).name, "id": Path(path).name, "exit_code": 2,
                "n_failed": 1, "n_checks": 0, "report": None,
                "message": str(exc), "seconds": time.perf_counter() - t0}
    except Exception as exc:                  # noqa: BLE001 - reported as internal
        return {"file": Path(path).name, "id": Path(path).name, "exit_code": 3,
                "n_failed": 1, "n_checks": 0, "report": None,
                "message": f"{type(exc).__name__}: {exc}",
                "seconds": time.perf_counter() - t0}


@dataclass
class SuiteResult:
    rows: list
    exit_code: int
    message: str = ""

    def table(self):
        lines = [f"{'scenario':<28} {'status':<8} {'failed':>6} {'checks':>6} "
                 f"{'time[s]':>8}"]
        for r in self.rows:
            status = {0: "pass", 1: "FAIL", 2: "INVALID", 3: "ERROR"}[r["exit_code"]]
            lines.append(f"{r['id']:<28} {status:<8} {r['n_failed']:>6} "
                         f"{r['n_checks']:>6} {r['seconds']:>8.1f}")
        if self.message:
            lines.append(self.message)
        return "\n".join(lines)


def verify_all(directory, out_dir=None, seed=0, tol_profile="default", jobs=1):
    """Run every ``*.scenario.json`` in ``directory``; worst exit code wins."""
    files = scenario_files(directory)
    if not files:
        return SuiteResult([], 2, f"no scenarios found in {directory}")
    args = [(str(f), seed, tol_profile) for f in files]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_file, args))
    else:
        rows = [_run_file(a) for a in args]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for r in rows:
            if r["report"] is not None:
                (out / f"{r['id']}.report.json").write_text(r["report"])
        summary = [{k: r[k] for k in ("file", "id", "exit_code", "n_failed",
                                      "n_checks")} for r in rows]
        (out / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
    codes = [r["exit_code"] for r in rows]
    code = 0
    for c in (3, 2, 1):
        if c in codes:
            code = c
            break
    return SuiteResult(rows, code)


__all__ = ["Scenario", "ScenarioReport", "SuiteResult", "parse_scenario",
           "load_scenario", "mesh_document", "run_scenario", "verify_all",
           "tolerance_profile", "SCENARIO_SCHEMA", "REPORT_SCHEMA",
           "MESH_SCHEMA", "ANALYSES", "PROFILES"]
