"""Flat text configuration: ``section.key = value`` lines.

One file carries every tunable of the pipeline (fusion, guided filter,
DIC, restoration). Unknown keys are rejected so typos fail loudly; values
are parsed by the target field's type. ``filter.scales`` is a comma list
and ``filter.mu_kappa_inf`` accepts ``auto`` for the per-image default.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .dic import DicConfig
from .fusion import FusionConfig
from .guided import GuidedFilterParams
from .restore import DEFAULT_NSR, TurbulenceParams


class ConfigError(ValueError):
    """Malformed config text or unknown key."""


@dataclass(frozen=True)
class ToolConfig:
    """Aggregate settings consumed by the command-line tools."""

    fusion: FusionConfig = field(default_factory=FusionConfig)
    dic: DicConfig = field(default_factory=DicConfig)
    restore_init: TurbulenceParams = field(default_factory=TurbulenceParams)
    nsr: float = DEFAULT_NSR


def _parse_scalar(text: str, kind: type):
    if kind is bool:
        low = text.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    raise ConfigError(f"unsupported value type {kind}")


def parse_config(text: str, base: ToolConfig | None = None) -> ToolConfig:
    """Parse flat config text into a ToolConfig, overriding ``base``."""
    cfg = base if base is not None else ToolConfig()
    fusion_kw: dict = {}
    filter_kw: dict = {}
    dic_kw: dict = {}
    restore_kw: dict = {}
    nsr = cfg.nsr

    fusion_fields = {f.name: f.type for f in fields(FusionConfig)}
    filter_fields = {f.name: f.type for f in fields(GuidedFilterParams)}
    dic_fields = {f.name: f.type for f in fields(DicConfig)}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if "." not in key:
            raise ConfigError(f"line {lineno}: key {key!r} lacks a section prefix")
        section, name = key.split(".", 1)
        try:
            if section == "fusion":
                if name == "sigma":
                    name = "fusion_sigma"
                if name not in fusion_fields or name == "filter":
                    raise ConfigError(f"unknown fusion key {name!r}")
                kind = {"mean_window": int, "contrast_radius": int, "filter_original": bool}.get(name, float)
                fusion_kw[name] = _parse_scalar(value, kind)
            elif section == "filter":
                if name == "scales":
                    filter_kw[name] = tuple(int(tok) for tok in value.split(",") if tok.strip())
                elif name == "mu_kappa_inf":
                    filter_kw[name] = None if value.lower() == "auto" else float(value)
                elif name in filter_fields:
                    kind = int if name == "radius" else float
                    filter_kw[name] = _parse_scalar(value, kind)
                else:
                    raise ConfigError(f"unknown filter key {name!r}")
            elif section == "dic":
                if name not in dic_fields:
                    raise ConfigError(f"unknown dic key {name!r}")
                kind = float if name in ("zncc_threshold", "prefilter_sigma") else int
                dic_kw[name] = _parse_scalar(value, kind)
            elif section == "restore":
                if name == "nsr":
                    nsr = float(value)
                elif name in ("beta", "omega"):
                    restore_kw[name] = float(value)
                else:
                    raise ConfigError(f"unknown restore key {name!r}")
            else:
                raise ConfigError(f"unknown section {section!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc

    filter_params = replace(cfg.fusion.filter, **filter_kw) if filter_kw else cfg.fusion.filter
    fusion = replace(cfg.fusion, filter=filter_params, **fusion_kw)
    dic = replace(cfg.dic, **dic_kw) if dic_kw else cfg.dic
    restore_init = replace(cfg.restore_init, **restore_kw) if restore_kw else cfg.restore_init
    return ToolConfig(fusion=fusion, dic=dic, restore_init=restore_init, nsr=nsr)


def load_config(path: str, base: ToolConfig | None = None) -> ToolConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


def dumps_config(cfg: ToolConfig) -> str:
    """Serialize a ToolConfig to canonical flat text."""
    fus, flt, dic = cfg.fusion, cfg.fusion.filter, cfg.dic
    mu = "auto" if flt.mu_kappa_inf is None else repr(flt.mu_kappa_inf)
    scales = ",".join(str(s) for s in flt.scales)
    lines = [
        f"fusion.alpha = {fus.alpha!r}",
        f"fusion.delta = {fus.delta!r}",
        f"fusion.mean_window = {fus.mean_window}",
        f"fusion.stretch_lo = {fus.stretch_lo!r}",
        f"fusion.stretch_hi = {fus.stretch_hi!r}",
        f"fusion.fusion_sigma = {fus.fusion_sigma!r}",
        f"fusion.contrast_radius = {fus.contrast_radius}",
        f"fusion.filter_original = {str(fus.filter_original).lower()}",
        f"filter.radius = {flt.radius}",
        f"filter.lam = {flt.lam!r}",
        f"filter.eta = {flt.eta!r}",
        f"filter.mu_kappa_inf = {mu}",
        f"filter.epsilon = {flt.epsilon!r}",
        f"filter.scales = {scales}",
        f"dic.subset_size = {dic.subset_size}",
        f"dic.grid_step = {dic.grid_step}",
        f"dic.zncc_threshold = {dic.zncc_threshold!r}",
        f"dic.max_iterations = {dic.max_iterations}",
        f"dic.search_radius = {dic.search_radius}",
        f"dic.strain_window = {dic.strain_window}",
        f"dic.prefilter_sigma = {dic.prefilter_sigma!r}",
        f"restore.beta = {cfg.restore_init.beta!r}",
        f"restore.omega = {cfg.restore_init.omega!r}",
        f"restore.nsr = {cfg.nsr!r}",
    ]
    return "\n".join(lines) + "\n"


def save_config(path: str, cfg: ToolConfig) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_config(cfg))
