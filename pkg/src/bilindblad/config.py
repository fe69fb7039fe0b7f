"""Structured run configuration: model data plus suite settings.

The on-disk format is JSON with the top-level sections ``chart``,
``poisson``, ``contact``, ``quantum``, ``symbols`` and ``suite`` (all
optional) and a ``model`` name.  Every expression is text in the grammar of
:mod:`bilindblad.symbolic.expr`; every matrix uses :mod:`bilindblad.serialize`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
import sympy as sp

from .gksl import GKSLGenerator
from .serialize import MatrixFormatError, generator_from_json, generator_to_json, matrix_from_json, matrix_to_json
from .symbolic import expr as E
from .symbolic.contact import ContactChart, chart_from_form, standard_chart
from .symbolic.poisson import ChartError, PoissonStructure

SUITES = ("pencil", "contact", "gksl", "pencil-quantum", "dephasing", "egorov")

DEFAULT_TOLERANCES = {
    "zero": 1e-12,      # numerical equality of matrices
    "kernel": 1e-9,     # singular-value cutoff for ker L^+
    "cp": 1e-10,        # Choi minimum eigenvalue
    "integral": 1e-10,  # |L^+(I)|
    "semigroup": 1e-9,
    "dephasing": 1e-8,  # relative, off-diagonal blocks
    "diagonal": 1e-10,  # absolute, diagonal blocks
    "cc1": 1e-10,
}


class ConfigError(ValueError):
    """Invalid configuration; message names the offending key or position."""


@dataclass
class ContactData:
    chart: ContactChart
    hamiltonian: str
    integrals: list[str] = field(default_factory=list)
    expected_flow: list[sp.Expr] | None = None
    expected_flow_action: dict[str, sp.Expr] = field(default_factory=dict)
    rank_at_least: int | None = None
    rank_functions: list[str] = field(default_factory=list)
    correspondence_pairs: int = 20


@dataclass
class EgorovCase:
    name: str
    H: str
    f: str
    lindblads: list[tuple[str, float]]
    hbars: list[float]
    N: int = 60
    margin: int = 6
    expect: str = "slope"  # "slope" or "exact"
    slope_range: tuple[float, float] = (0.8, float("inf"))


@dataclass
class QuantumData:
    generator: GKSLGenerator | None = None
    partner: GKSLGenerator | None = None
    integrals: list[np.ndarray] = field(default_factory=list)
    lambdas: list[float] = field(default_factory=lambda: [0.0, 0.5, 1.0])
    initial_state: np.ndarray | None = None
    times: list[float] = field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0])
    kernel_dim: int | None = None
    adjoint_checks: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    egorov: list[EgorovCase] = field(default_factory=list)


@dataclass
class SuiteSettings:
    suites: list[str] = field(default_factory=list)
    seed: int = 0
    samples: int = 100
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    pencil_mode: str | None = None


@dataclass
class ModelData:
    name: str
    coordinates: tuple[str, ...] = ()
    parameters: tuple[str, ...] = ()
    symbols: dict[str, sp.Expr] = field(default_factory=dict)
    structures: dict[str, PoissonStructure] = field(default_factory=dict)
    pencil: tuple[str, str, str] | None = None
    casimirs: dict[str, list[str]] = field(default_factory=dict)
    bihamiltonian: list[tuple[str, str]] | None = None
    expected_field: list[sp.Expr] | None = None
    involutions: list[tuple[str, str, str]] = field(default_factory=list)
    liouville: list[sp.Expr] | None = None
    homogeneity: dict[str, Fraction] = field(default_factory=dict)
    restrictions: list[tuple[str, dict[str, sp.Expr], sp.Expr]] = field(default_factory=list)
    contact: ContactData | None = None
    quantum: QuantumData | None = None
    settings: SuiteSettings = field(default_factory=SuiteSettings)

    def symbol(self, name: str) -> sp.Expr:
        return self.symbols[name]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _require(obj: Any, typ, key: str):
    if not isinstance(obj, typ):
        names = typ.__name__ if isinstance(typ, type) else "/".join(t.__name__ for t in typ)
        raise ConfigError(f"{key}: expected {names}, got {type(obj).__name__}")
    return obj


def _keys(obj: dict, allowed: set[str], key: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{key}: unknown key(s) {', '.join(unknown)}")


def _expr(text: Any, allowed: set[str], key: str) -> sp.Expr:
    _require(text, str, key)
    try:
        return E.parse(text, allowed)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _matrix(obj: Any, key: str) -> np.ndarray:
    try:
        return matrix_from_json(obj, key)
    except MatrixFormatError as exc:
        raise ConfigError(str(exc)) from None


def _generator(obj: Any, key: str) -> GKSLGenerator:
    try:
        return generator_from_json(obj, key)
    except MatrixFormatError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def parse_config(text: str) -> ModelData:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(raw)


def from_dict(raw: Any) -> ModelData:
    _require(raw, dict, "config")
    _keys(raw, {"model", "chart", "poisson", "contact", "quantum", "symbols", "suite"}, "config")
    name = _require(raw.get("model", "custom"), str, "model")

    chart = _require(raw.get("chart", {}), dict, "chart")
    _keys(chart, {"coordinates", "parameters"}, "chart")
    coords = tuple(_require(chart.get("coordinates", []), list, "chart.coordinates"))
    params = tuple(_require(chart.get("parameters", []), list, "chart.parameters"))

    contact_raw = _require(raw.get("contact", {}), dict, "contact")
    contact_coords = tuple(contact_raw.get("coordinates", ()))
    ident = set(coords) | set(params) | set(contact_coords) | set(E.PARAMETERS) | {"r"}

    symbols: dict[str, sp.Expr] = {}
    for k, v in _require(raw.get("symbols", {}), dict, "symbols").items():
        symbols[k] = _expr(v, ident, f"symbols.{k}")

    def sym(ref: Any, key: str) -> str:
        _require(ref, str, key)
        if ref not in symbols:
            raise ConfigError(f"{key}: unknown symbol {ref!r}")
        return ref

    data = ModelData(name, coords, params, symbols)

    pois = _require(raw.get("poisson", {}), dict, "poisson")
    _keys(pois, {"structures", "pencil", "casimirs", "bihamiltonian", "expected_field", "involutions",
                 "liouville", "homogeneity", "restrictions"}, "poisson")
    for sname, brackets in _require(pois.get("structures", {}), dict, "poisson.structures").items():
        key = f"poisson.structures.{sname}"
        pairs = {}
        for pair, value in _require(brackets, dict, key).items():
            parts = tuple(p.strip() for p in pair.split(","))
            if len(parts) != 2:
                raise ConfigError(f"{key}: bracket key {pair!r} must read 'a,b'")
            for p in parts:
                if p not in coords:
                    raise ConfigError(f"{key}: bracket {{{parts[0]},{parts[1]}}} references unknown coordinate {p!r}")
            pairs[parts] = _expr(value, set(coords) | set(params), f"{key}[{pair}]")
        try:
            data.structures[sname] = PoissonStructure.from_brackets(coords, pairs, params)
        except ChartError as exc:
            raise ConfigError(f"{key}: {exc}") from None

    def struct(ref: Any, key: str, allow_pencil: bool = False) -> str:
        _require(ref, str, key)
        if ref not in data.structures and not (allow_pencil and ref == "pencil"):
            raise ConfigError(f"{key}: unknown Poisson structure {ref!r}")
        return ref

    if "pencil" in pois:
        p = _require(pois["pencil"], dict, "poisson.pencil")
        _keys(p, {"legs", "mode"}, "poisson.pencil")
        legs = _require(p.get("legs"), list, "poisson.pencil.legs")
        if len(legs) != 2:
            raise ConfigError("poisson.pencil.legs: need exactly two structures")
        mode = p.get("mode", "convex")
        if mode not in ("convex", "difference"):
            raise ConfigError(f"poisson.pencil.mode: unknown mode {mode!r}")
        data.pencil = (struct(legs[0], "poisson.pencil.legs"), struct(legs[1], "poisson.pencil.legs"), mode)
    for sname, names in _require(pois.get("casimirs", {}), dict, "poisson.casimirs").items():
        struct(sname, "poisson.casimirs")
        data.casimirs[sname] = [sym(n, f"poisson.casimirs.{sname}") for n in _require(names, list, f"poisson.casimirs.{sname}")]
    if "bihamiltonian" in pois:
        bh = _require(pois["bihamiltonian"], list, "poisson.bihamiltonian")
        if len(bh) != 2 or not all(isinstance(x, list) and len(x) == 2 for x in bh):
            raise ConfigError("poisson.bihamiltonian: expected [[structure, hamiltonian], [structure, hamiltonian]]")
        data.bihamiltonian = [(struct(s, "poisson.bihamiltonian"), sym(h, "poisson.bihamiltonian")) for s, h in bh]
    if "expected_field" in pois:
        data.expected_field = [_expr(t, ident, f"poisson.expected_field[{i}]")
                               for i, t in enumerate(_require(pois["expected_field"], list, "poisson.expected_field"))]
    for i, inv in enumerate(_require(pois.get("involutions", []), list, "poisson.involutions")):
        key = f"poisson.involutions[{i}]"
        if not isinstance(inv, list) or len(inv) != 3:
            raise ConfigError(f"{key}: expected [f, g, structure]")
        data.involutions.append((sym(inv[0], key), sym(inv[1], key), struct(inv[2], key, allow_pencil=True)))
    if "liouville" in pois:
        data.liouville = [_expr(t, ident, f"poisson.liouville[{i}]")
                          for i, t in enumerate(_require(pois["liouville"], list, "poisson.liouville"))]
        if len(data.liouville) != len(coords):
            raise ConfigError("poisson.liouville: need one component per chart coordinate")
    for fname, deg in _require(pois.get("homogeneity", {}), dict, "poisson.homogeneity").items():
        sym(fname, "poisson.homogeneity")
        try:
            data.homogeneity[fname] = Fraction(str(deg))
        except ValueError:
            raise ConfigError(f"poisson.homogeneity.{fname}: not a rational degree: {deg!r}") from None
    for i, r in enumerate(_require(pois.get("restrictions", []), list, "poisson.restrictions")):
        key = f"poisson.restrictions[{i}]"
        _require(r, dict, key)
        _keys(r, {"function", "bindings", "expected"}, key)
        b = {k: _expr(v, ident, f"{key}.bindings.{k}") for k, v in _require(r.get("bindings", {}), dict, f"{key}.bindings").items()}
        data.restrictions.append((sym(r.get("function"), f"{key}.function"), b, _expr(r.get("expected"), ident, f"{key}.expected")))

    if contact_raw:
        data.contact = _parse_contact(contact_raw, ident, sym)
    if "quantum" in raw:
        data.quantum = _parse_quantum(_require(raw["quantum"], dict, "quantum"))
    data.settings = _parse_suite(_require(raw.get("suite", {}), dict, "suite"))
    return data


def _parse_contact(c: dict, ident: set[str], sym) -> ContactData:
    _keys(c, {"coordinates", "alpha", "hamiltonian", "integrals", "expected_flow", "expected_flow_action",
              "rank_at_least", "rank_functions", "correspondence_pairs"}, "contact")
    coords = tuple(_require(c.get("coordinates", ["q", "p", "z"]), list, "contact.coordinates"))
    if "alpha" in c:
        alpha = [_expr(t, set(coords), f"contact.alpha[{i}]") for i, t in enumerate(_require(c["alpha"], list, "contact.alpha"))]
        if len(alpha) != len(coords):
            raise ConfigError("contact.alpha: need one component per contact coordinate")
        try:
            chart = chart_from_form(coords, alpha)
        except ChartError as exc:
            raise ConfigError(f"contact.alpha: {exc}") from None
    else:
        chart = standard_chart(coords)
    out = ContactData(chart, sym(c.get("hamiltonian"), "contact.hamiltonian"))
    out.integrals = [sym(n, "contact.integrals") for n in _require(c.get("integrals", []), list, "contact.integrals")]
    if "expected_flow" in c:
        out.expected_flow = [_expr(t, ident, f"contact.expected_flow[{i}]") for i, t in enumerate(c["expected_flow"])]
    for k, v in _require(c.get("expected_flow_action", {}), dict, "contact.expected_flow_action").items():
        out.expected_flow_action[sym(k, "contact.expected_flow_action")] = _expr(v, ident, f"contact.expected_flow_action.{k}")
    if "rank_at_least" in c:
        out.rank_at_least = int(_require(c["rank_at_least"], int, "contact.rank_at_least"))
    out.rank_functions = [sym(n, "contact.rank_functions") for n in _require(c.get("rank_functions", []), list, "contact.rank_functions")]
    out.correspondence_pairs = int(_require(c.get("correspondence_pairs", 20), int, "contact.correspondence_pairs"))
    return out


def _parse_quantum(q: dict) -> QuantumData:
    _keys(q, {"generator", "partner", "integrals", "lambdas", "initial_state", "times", "kernel_dim",
              "adjoint_checks", "egorov"}, "quantum")
    out = QuantumData()
    if "generator" in q:
        out.generator = _generator(q["generator"], "quantum")
    if "partner" in q:
        out.partner = _generator(q["partner"], "quantum.partner")
    out.integrals = [_matrix(m, f"quantum.integrals[{i}]") for i, m in enumerate(_require(q.get("integrals", []), list, "quantum.integrals"))]
    for i, m in enumerate(out.integrals):
        if np.linalg.norm(m - m.conj().T, 2) > 1e-10:
            raise ConfigError(f"quantum.integrals[{i}] is not Hermitian")
    if "lambdas" in q:
        out.lambdas = [float(v) for v in _require(q["lambdas"], list, "quantum.lambdas")]
        if any(not 0 <= v <= 1 for v in out.lambdas):
            raise ConfigError("quantum.lambdas: values must lie in [0, 1]")
    if "initial_state" in q:
        out.initial_state = _matrix(q["initial_state"], "quantum.initial_state")
    if "times" in q:
        out.times = [float(v) for v in _require(q["times"], list, "quantum.times")]
        if any(t < 0 for t in out.times):
            raise ConfigError("quantum.times: times must be nonnegative")
    if "kernel_dim" in q:
        out.kernel_dim = _require(q["kernel_dim"], int, "quantum.kernel_dim")
    for i, chk in enumerate(_require(q.get("adjoint_checks", []), list, "quantum.adjoint_checks")):
        key = f"quantum.adjoint_checks[{i}]"
        _require(chk, dict, key)
        _keys(chk, {"A", "expected"}, key)
        out.adjoint_checks.append((_matrix(chk.get("A"), f"{key}.A"), _matrix(chk.get("expected"), f"{key}.expected")))
    for i, case in enumerate(_require(q.get("egorov", []), list, "quantum.egorov")):
        key = f"quantum.egorov[{i}]"
        _require(case, dict, key)
        _keys(case, {"name", "H", "f", "lindblads", "hbars", "N", "margin", "expect", "slope_range"}, key)
        phase = {"x", "xi", "hbar"}
        for part in ("H", "f"):
            _expr(case.get(part), phase, f"{key}.{part}")
        lind = []
        for j, l in enumerate(_require(case.get("lindblads", []), list, f"{key}.lindblads")):
            _require(l, dict, f"{key}.lindblads[{j}]")
            _expr(l.get("symbol"), phase, f"{key}.lindblads[{j}].symbol")
            rate = l.get("rate")
            if not isinstance(rate, (int, float)) or rate < 0:
                raise ConfigError(f"{key}.lindblads[{j}].rate: must be a nonnegative number")
            lind.append((l["symbol"], float(rate)))
        expect = case.get("expect", "slope")
        if expect not in ("slope", "exact"):
            raise ConfigError(f"{key}.expect: must be 'slope' or 'exact'")
        lo, hi = case.get("slope_range", [0.8, None])
        out.egorov.append(EgorovCase(
            name=_require(case.get("name", f"case{i}"), str, f"{key}.name"),
            H=case["H"], f=case["f"], lindblads=lind,
            hbars=[float(h) for h in _require(case.get("hbars", [1, 0.5, 0.25, 0.125, 0.0625, 0.03125]), list, f"{key}.hbars")],
            N=int(case.get("N", 60)), margin=int(case.get("margin", 6)), expect=expect,
            slope_range=(float(lo), float("inf") if hi is None else float(hi)),
        ))
    return out


def _parse_suite(s: dict) -> SuiteSettings:
    _keys(s, {"suites", "seed", "samples", "tolerances", "pencil_mode"}, "suite")
    out = SuiteSettings()
    out.suites = list(_require(s.get("suites", []), list, "suite.suites"))
    for name in out.suites:
        if name not in SUITES:
            raise ConfigError(f"suite.suites: unknown suite {name!r}")
    out.seed = _require(s.get("seed", 0), int, "suite.seed")
    out.samples = _require(s.get("samples", 100), int, "suite.samples")
    for k, v in _require(s.get("tolerances", {}), dict, "suite.tolerances").items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"suite.tolerances: unknown tolerance {k!r}")
        out.tolerances[k] = float(v)
    if "pencil_mode" in s:
        if s["pencil_mode"] not in ("convex", "difference"):
            raise ConfigError(f"suite.pencil_mode: unknown mode {s['pencil_mode']!r}")
        out.pencil_mode = s["pencil_mode"]
    return out


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def to_dict(data: ModelData) -> dict[str, Any]:
    T = E.to_text
    out: dict[str, Any] = {"model": data.name}
    if data.coordinates:
        out["chart"] = {"coordinates": list(data.coordinates), "parameters": list(data.parameters)}
    if data.symbols:
        out["symbols"] = {k: T(v) for k, v in data.symbols.items()}
    pois: dict[str, Any] = {}
    if data.structures:
        pois["structures"] = {n: {f"{a},{b}": T(v) for (a, b), v in P.brackets().items()}
                              for n, P in data.structures.items()}
    if data.pencil:
        pois["pencil"] = {"legs": [data.pencil[0], data.pencil[1]], "mode": data.pencil[2]}
    if data.casimirs:
        pois["casimirs"] = {k: list(v) for k, v in data.casimirs.items()}
    if data.bihamiltonian:
        pois["bihamiltonian"] = [list(x) for x in data.bihamiltonian]
    if data.expected_field is not None:
        pois["expected_field"] = [T(e) for e in data.expected_field]
    if data.involutions:
        pois["involutions"] = [list(x) for x in data.involutions]
    if data.liouville is not None:
        pois["liouville"] = [T(e) for e in data.liouville]
    if data.homogeneity:
        pois["homogeneity"] = {k: str(v) for k, v in data.homogeneity.items()}
    if data.restrictions:
        pois["restrictions"] = [{"function": f, "bindings": {k: T(v) for k, v in b.items()}, "expected": T(e)}
                                for f, b, e in data.restrictions]
    if pois:
        out["poisson"] = pois
    if data.contact:
        c = data.contact
        cd: dict[str, Any] = {"coordinates": list(c.chart.coordinates), "hamiltonian": c.hamiltonian}
        if not c.chart.standard:
            cd["alpha"] = [T(a) for a in c.chart.alpha]
        if c.integrals:
            cd["integrals"] = list(c.integrals)
        if c.expected_flow is not None:
            cd["expected_flow"] = [T(e) for e in c.expected_flow]
        if c.expected_flow_action:
            cd["expected_flow_action"] = {k: T(v) for k, v in c.expected_flow_action.items()}
        if c.rank_at_least is not None:
            cd["rank_at_least"] = c.rank_at_least
        if c.rank_functions:
            cd["rank_functions"] = list(c.rank_functions)
        cd["correspondence_pairs"] = c.correspondence_pairs
        out["contact"] = cd
    if data.quantum:
        q = data.quantum
        qd: dict[str, Any] = {}
        if q.generator is not None:
            qd["generator"] = generator_to_json(q.generator)
        if q.partner is not None:
            qd["partner"] = generator_to_json(q.partner)
        if q.integrals:
            qd["integrals"] = [matrix_to_json(m) for m in q.integrals]
        qd["lambdas"] = list(q.lambdas)
        if q.initial_state is not None:
            qd["initial_state"] = matrix_to_json(q.initial_state)
        qd["times"] = list(q.times)
        if q.kernel_dim is not None:
            qd["kernel_dim"] = q.kernel_dim
        if q.adjoint_checks:
            qd["adjoint_checks"] = [{"A": matrix_to_json(a), "expected": matrix_to_json(b)} for a, b in q.adjoint_checks]
        if q.egorov:
            qd["egorov"] = [{
                "name": e.name, "H": e.H, "f": e.f,
                "lindblads": [{"symbol": s, "rate": r} for s, r in e.lindblads],
                "hbars": e.hbars, "N": e.N, "margin": e.margin, "expect": e.expect,
                "slope_range": [e.slope_range[0], None if e.slope_range[1] == float("inf") else e.slope_range[1]],
            } for e in q.egorov]
        out["quantum"] = qd
    s = data.settings
    sd: dict[str, Any] = {"suites": list(s.suites), "seed": s.seed, "samples": s.samples, "tolerances": dict(s.tolerances)}
    if s.pencil_mode:
        sd["pencil_mode"] = s.pencil_mode
    out["suite"] = sd
    return out


def dumps(data: ModelData) -> str:
    return json.dumps(to_dict(data), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
