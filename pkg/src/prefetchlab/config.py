"""Flat key=value run configuration and the prefetcher registry."""

from __future__ import annotations

from typing import Dict, Iterable, Optional

from .cache import PLACEMENT_BUFFER, PLACEMENT_IN_CACHE, CacheConfig
from .engine import Prefetcher
from .rmd import RmdPrefetcher
from .spatial import BingoPrefetcher, SmsPrefetcher, VldpPrefetcher
from .stems import StemsPrefetcher
from .stride_offset import (
    BestOffsetPrefetcher,
    IbspPrefetcher,
    MlopPrefetcher,
    SandboxPrefetcher,
)
from .temporal import DominoPrefetcher, IsbPrefetcher, StmsPrefetcher


class ConfigError(Exception):
    """Invalid configuration (unknown key, bad value, unknown prefetcher)."""


DEFAULTS: Dict[str, object] = {
    "prefetcher.name": "none",
    "prefetcher.degree": 4,
    "prefetcher.adaptive": False,
    "cache.sets": 64,
    "cache.ways": 4,
    "cache.block_size": 64,
    "cache.placement": PLACEMENT_IN_CACHE,
    "cache.buffer_entries": 32,
    "region.blocks": 32,
    "sim.latency_events": 32,
    "sim.warmup_frac": 0.10,
    "metadata.latency_events": 0,
    "ibsp.entries": 256,
    "ibsp.ways": 4,
    "ibsp.lookahead": 4,
    "offset.range": 8,
    "sp.threshold": 0.25,
    "sp.window": 1024,
    "bop.window": 1024,
    "mlop.window": 1024,
    "mlop.levels": 4,
    "mlop.amt_rows": 64,
    "sms.pht_entries": 2048,
    "sms.pht_ways": 8,
    "sms.timeout": 4096,
    "vldp.dpt_orders": 3,
    "vldp.dpt_entries": 64,
    "vldp.dhb_rows": 16,
    "bingo.sets": 1024,
    "bingo.ways": 16,
    "stms.history_entries": 1 << 16,
    "stms.index_entries": 1 << 15,
    "stms.index_ways": 8,
    "domino.rows": 1 << 14,
    "domino.super_entries": 4,
    "domino.entries": 4,
    "isb.chunk": 16,
    "isb.pages": 1024,
    "stems.rmob_entries": 1 << 16,
    "stems.pst_entries": 2048,
    "rmd.backend": "delta",
    "rmd.cap": 8,
    "rmd.entries": 4096,
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class Config:
    """Typed view over a flat key=value mapping with documented defaults."""

    def __init__(self, values: Optional[Dict[str, str]] = None) -> None:
        values = dict(values or {})
        unknown = set(values) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        self._values = values

    def raw(self, key: str):
        if key in self._values:
            return self._values[key]
        return DEFAULTS[key]

    def get_int(self, key: str) -> int:
        value = self.raw(key)
        try:
            return int(value, 0) if isinstance(value, str) else int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected an integer, got {value!r}") from None

    def get_float(self, key: str) -> float:
        try:
            return float(self.raw(key))
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected a number") from None

    def get_bool(self, key: str) -> bool:
        value = self.raw(key)
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")

    def get_str(self, key: str) -> str:
        return str(self.raw(key))

    def set(self, key: str, value) -> None:
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key: {key}")
        self._values[key] = value

    def copy(self) -> "Config":
        return Config(dict(self._values))


def parse_config_text(lines: Iterable[str]) -> Config:
    """Parse ``key = value`` lines; `#` comments and blank lines ignored."""
    values: Dict[str, str] = {}
    for line_no, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, value = text.partition("=")
        if not sep:
            raise ConfigError(f"line {line_no}: expected key=value, got {text!r}")
        values[key.strip()] = value.strip()
    return Config(values)


def load_config(path: str) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh)


def cache_config(cfg: Config) -> CacheConfig:
    placement = cfg.get_str("cache.placement")
    if placement not in (PLACEMENT_IN_CACHE, PLACEMENT_BUFFER):
        raise ConfigError(f"cache.placement: unknown placement {placement!r}")
    return CacheConfig(
        sets=cfg.get_int("cache.sets"),
        ways=cfg.get_int("cache.ways"),
        block_size=cfg.get_int("cache.block_size"),
        placement=placement,
        buffer_entries=cfg.get_int("cache.buffer_entries"),
    )


def build_prefetcher(cfg: Config) -> Prefetcher:
    name = cfg.get_str("prefetcher.name")
    degree = cfg.get_int("prefetcher.degree")
    region_blocks = cfg.get_int("region.blocks")
    if name == "none":
        return Prefetcher()
    if name == "ibsp":
        return IbspPrefetcher(entries=cfg.get_int("ibsp.entries"),
                              ways=cfg.get_int("ibsp.ways"),
                              lookahead=cfg.get_int("ibsp.lookahead"))
    if name == "sp":
        return SandboxPrefetcher(offset_range=cfg.get_int("offset.range"),
                                 threshold=cfg.get_float("sp.threshold"),
                                 window=cfg.get_int("sp.window"))
    if name == "bop":
        return BestOffsetPrefetcher(offset_range=cfg.get_int("offset.range"),
                                    window=cfg.get_int("bop.window"),
                                    timely_distance=cfg.get_int("sim.latency_events"))
    if name == "mlop":
        return MlopPrefetcher(offset_range=cfg.get_int("offset.range"),
                              levels=cfg.get_int("mlop.levels"),
                              window=cfg.get_int("mlop.window"),
                              amt_rows=cfg.get_int("mlop.amt_rows"),
                              blocks_per_region=region_blocks)
    if name == "sms":
        return SmsPrefetcher(blocks_per_region=region_blocks,
                             pht_entries=cfg.get_int("sms.pht_entries"),
                             pht_ways=cfg.get_int("sms.pht_ways"),
                             timeout=cfg.get_int("sms.timeout"))
    if name == "vldp":
        return VldpPrefetcher(blocks_per_region=region_blocks,
                              dpt_orders=cfg.get_int("vldp.dpt_orders"),
                              dpt_entries=cfg.get_int("vldp.dpt_entries"),
                              dhb_rows=cfg.get_int("vldp.dhb_rows"),
                              degree=degree)
    if name == "bingo":
        return BingoPrefetcher(blocks_per_region=region_blocks,
                               sets=cfg.get_int("bingo.sets"),
                               ways=cfg.get_int("bingo.ways"),
                               timeout=cfg.get_int("sms.timeout"))
    if name == "stms":
        return StmsPrefetcher(history_entries=cfg.get_int("stms.history_entries"),
                              index_entries=cfg.get_int("stms.index_entries"),
                              index_ways=cfg.get_int("stms.index_ways"),
                              degree=degree,
                              metadata_latency=cfg.get_int("metadata.latency_events"))
    if name == "domino":
        return DominoPrefetcher(history_entries=cfg.get_int("stms.history_entries"),
                                rows=cfg.get_int("domino.rows"),
                                super_entries=cfg.get_int("domino.super_entries"),
                                entries=cfg.get_int("domino.entries"),
                                degree=degree,
                                metadata_latency=cfg.get_int("metadata.latency_events"))
    if name == "isb":
        return IsbPrefetcher(chunk=cfg.get_int("isb.chunk"),
                             degree=degree,
                             resident_pages=cfg.get_int("isb.pages"))
    if name == "stems":
        return StemsPrefetcher(blocks_per_region=region_blocks,
                               rmob_entries=cfg.get_int("stems.rmob_entries"),
                               pst_entries=cfg.get_int("stems.pst_entries"),
                               degree=degree,
                               timeout=cfg.get_int("sms.timeout"),
                               metadata_latency=cfg.get_int("metadata.latency_events"))
    if name == "rmd":
        return RmdPrefetcher(backend=cfg.get_str("rmd.backend"),
                             cap=cfg.get_int("rmd.cap"),
                             entries=cfg.get_int("rmd.entries"),
                             blocks_per_region=region_blocks)
    raise ConfigError(f"unknown prefetcher name {name!r}")


PREFETCHER_NAMES = ("none", "ibsp", "sp", "bop", "mlop", "sms", "vldp",
                    "bingo", "stms", "domino", "isb", "stems", "rmd")
