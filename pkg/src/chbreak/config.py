"""Run configuration: a small INI dialect with strict, line-anchored errors.

configparser keeps no line numbers, so the reader here is hand-rolled: a
flat section/key scan that remembers where every entry came from. Unknown
sections or keys are rejected with path:line messages instead of being
ignored, and emit() writes a canonical form whose parse is identical to the
original (round-trip stability is part of the contract and is tested).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigError
from .grid import Grid
from .model import DATUM_FAMILIES, DissipationProfile, InitialDatum, PROFILE_KINDS
from .solver import SolverConfig

_FLOAT_LIST = "float_list"

_SCHEMA: dict[str, dict[str, object]] = {
    "grid": {"half_length": float, "n_points": int},
    "datum": {"family": str, "amplitude": float, "width": float,
              "center": float, "values": _FLOAT_LIST},
    "dissipation": {"kind": str, "value": float, "start": float, "ramp_rate": float,
                    "offset": float, "amplitude": float, "omega": float,
                    "times": _FLOAT_LIST, "values": _FLOAT_LIST, "delta_sup": float},
    # c_m caps dt at c_m/|min slope|; m_stop is the slope level that ends a run
    "solver": {"t_end": float, "cfl_factor": float, "c_m": float,
               "dt_min": float, "m_stop": float, "record_stride": int,
               "tail_tol": float, "collapse_margin": float, "edge_tol": float},
    "outputs": {"records_csv": str, "summary_json": str, "plots_dir": str},
    "characteristics": {"seeds": _FLOAT_LIST},
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a simulate run needs, decoupled from where it came from."""

    grid: Grid
    datum: InitialDatum
    profile: DissipationProfile
    t_end: float
    cfl_factor: float = 0.3
    slope_dt_factor: float = 0.2
    dt_min: float = 1.0e-12
    breaking_threshold: float = -1.0e6
    record_stride: int = 1
    tail_tol: float = 1.0e-6
    collapse_margin: float = 1.05
    edge_tol: float = 1.0e-8
    seeds: tuple[float, ...] = ()
    records_csv: str | None = None
    summary_json: str | None = None
    plots_dir: str | None = None

    def to_solver_config(self) -> SolverConfig:
        return SolverConfig(
            grid=self.grid, datum=self.datum, profile=self.profile, t_end=self.t_end,
            cfl_factor=self.cfl_factor, slope_dt_factor=self.slope_dt_factor,
            dt_min=self.dt_min, breaking_threshold=self.breaking_threshold,
            record_stride=self.record_stride, seeds=self.seeds,
            tail_tol=self.tail_tol, collapse_margin=self.collapse_margin,
            edge_tol=self.edge_tol)

    def with_refinement(self, factor: int = 2) -> "RunConfig":
        """Same run on a grid refined by factor with the CFL tightened to match."""
        return replace(
            self,
            grid=Grid(self.grid.half_length, self.grid.n_points * factor),
            cfl_factor=self.cfl_factor / factor)


def _read_sections(text: str, path: str):
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    section_lines: dict[str, int] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name in sections:
                raise ConfigError(f"{path}:{lineno}: duplicate section [{name}]")
            sections[name] = {}
            section_lines[name] = lineno
            current = name
            continue
        if current is None:
            raise ConfigError(f"{path}:{lineno}: entry outside any [section]")
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in sections[current]:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = (val.strip(), lineno)
    return sections, section_lines


def _convert(path: str, section: str, key: str, raw: str, lineno: int, kind):
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            return int(raw)
        if kind is _FLOAT_LIST:
            toks = raw.replace(",", " ").split()
            if not toks:
                raise ValueError("empty list")
            return tuple(float(t) for t in toks)
        return raw
    except ValueError:
        want = {float: "a number", int: "an integer", _FLOAT_LIST: "a list of numbers"}[kind]
        raise ConfigError(
            f"{path}:{lineno}: [{section}] {key} expects {want}, got {raw!r}") from None


def _validate_and_convert(text: str, path: str) -> dict[str, dict[str, object]]:
    sections, section_lines = _read_sections(text, path)
    out: dict[str, dict[str, object]] = {}
    for name, entries in sections.items():
        if name not in _SCHEMA:
            raise ConfigError(f"{path}:{section_lines[name]}: unknown section [{name}]")
        table = _SCHEMA[name]
        out[name] = {}
        for key, (raw, lineno) in entries.items():
            if key not in table:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in [{name}]")
            out[name][key] = _convert(path, name, key, raw, lineno, table[key])
    return out


def _require(path: str, data: dict, section: str, key: str):
    if section not in data or key not in data[section]:
        raise ConfigError(f"{path}: missing required [{section}] {key}")
    return data[section][key]


def _build_profile(path: str, sec: dict) -> DissipationProfile:
    kind = sec.get("kind")
    if kind not in PROFILE_KINDS:
        raise ConfigError(
            f"{path}: [dissipation] kind must be one of {PROFILE_KINDS}, got {kind!r}")
    delta = sec.get("delta_sup")

    def need(*keys):
        missing = [k for k in keys if k not in sec]
        if missing:
            raise ConfigError(
                f"{path}: [dissipation] kind {kind!r} needs {', '.join(missing)}")

    if kind == "constant":
        need("value")
        return DissipationProfile.constant(sec["value"], delta)
    if kind == "linear_ramp":
        need("start", "ramp_rate", "delta_sup")
        return DissipationProfile.linear_ramp(sec["start"], sec["ramp_rate"], delta)
    if kind == "sinusoidal":
        need("offset", "amplitude", "omega")
        return DissipationProfile.sinusoidal(sec["offset"], sec["amplitude"], sec["omega"], delta)
    need("times", "values")
    return DissipationProfile.piecewise(sec["times"], sec["values"], delta)


def _build_datum(path: str, sec: dict) -> InitialDatum:
    family = sec.get("family")
    if family not in DATUM_FAMILIES:
        raise ConfigError(
            f"{path}: [datum] family must be one of {DATUM_FAMILIES}, got {family!r}")
    if family == "samples":
        if "values" not in sec:
            raise ConfigError(f"{path}: [datum] family 'samples' needs values")
        return InitialDatum(family="samples", values=sec["values"],
                            center=sec.get("center", 0.0))
    for key in ("amplitude", "width"):
        if key not in sec:
            raise ConfigError(f"{path}: [datum] family {family!r} needs {key}")
    return InitialDatum(family=family, amplitude=sec["amplitude"],
                        width=sec["width"], center=sec.get("center", 0.0))


def parse_config(text: str, path: str = "<config>") -> RunConfig:
    data = _validate_and_convert(text, path)
    half_length = _require(path, data, "grid", "half_length")
    n_points = _require(path, data, "grid", "n_points")
    try:
        grid = Grid(half_length, n_points)
    except ValueError as exc:
        raise ConfigError(f"{path}: [grid] {exc}") from None
    if "datum" not in data:
        raise ConfigError(f"{path}: missing section [datum]")
    datum = _build_datum(path, data["datum"])
    if "dissipation" not in data:
        raise ConfigError(f"{path}: missing section [dissipation]")
    profile = _build_profile(path, data["dissipation"])
    solver_sec = data.get("solver", {})
    if "t_end" not in solver_sec:
        raise ConfigError(f"{path}: missing required [solver] t_end")
    outputs = data.get("outputs", {})
    seeds = data.get("characteristics", {}).get("seeds", ())
    kwargs = {k: solver_sec[k] for k in solver_sec}
    t_end = kwargs.pop("t_end")
    if "c_m" in kwargs:
        kwargs["slope_dt_factor"] = kwargs.pop("c_m")
    if "m_stop" in kwargs:
        kwargs["breaking_threshold"] = kwargs.pop("m_stop")
    try:
        return RunConfig(
            grid=grid, datum=datum, profile=profile, t_end=t_end,
            seeds=tuple(seeds),
            records_csv=outputs.get("records_csv"),
            summary_json=outputs.get("summary_json"),
            plots_dir=outputs.get("plots_dir"),
            **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path)


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(cfg: RunConfig) -> str:
    """Canonical INI text whose parse equals cfg exactly."""
    lines: list[str] = []

    def section(name: str, pairs) -> None:
        body = [(k, v) for k, v in pairs if v is not None]
        if not body:
            return
        if lines:
            lines.append("")
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {_fmt(v)}" for k, v in body)

    section("grid", [("half_length", cfg.grid.half_length),
                     ("n_points", cfg.grid.n_points)])
    d = cfg.datum
    if d.family == "samples":
        datum_pairs = [("family", d.family), ("center", d.center), ("values", d.values)]
    else:
        datum_pairs = [("family", d.family), ("amplitude", d.amplitude),
                       ("width", d.width), ("center", d.center)]
    section("datum", datum_pairs)
    p = cfg.profile
    diss_pairs: list[tuple[str, object]] = [("kind", p.kind)]
    if p.kind == "constant":
        diss_pairs.append(("value", p.params[0]))
    elif p.kind == "linear_ramp":
        diss_pairs += [("start", p.params[0]), ("ramp_rate", p.params[1])]
    elif p.kind == "sinusoidal":
        diss_pairs += [("offset", p.params[0]), ("amplitude", p.params[1]),
                       ("omega", p.params[2])]
    else:
        diss_pairs += [("times", p.knot_times), ("values", p.knot_values)]
    diss_pairs.append(("delta_sup", p.delta_sup))
    section("dissipation", diss_pairs)
    section("solver", [
        ("t_end", cfg.t_end), ("cfl_factor", cfg.cfl_factor),
        ("c_m", cfg.slope_dt_factor), ("dt_min", cfg.dt_min),
        ("m_stop", cfg.breaking_threshold),
        ("record_stride", cfg.record_stride), ("tail_tol", cfg.tail_tol),
        ("collapse_margin", cfg.collapse_margin), ("edge_tol", cfg.edge_tol)])
    section("outputs", [("records_csv", cfg.records_csv),
                        ("summary_json", cfg.summary_json),
                        ("plots_dir", cfg.plots_dir)])
    if cfg.seeds:
        section("characteristics", [("seeds", cfg.seeds)])
    lines.append("")
    return "\n".join(lines)
