"""Line-oriented experiment configuration.

Config files contain `section.key=value` lines (blank lines and `#`
comments allowed). Sections are kernel1, kernel2, kernel3, grid, and
experiment; unknown sections or keys are errors so typos cannot silently
change a study.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigError, DomainError
from .kernels import KernelSpec

CROSSING_SCAN = "cross"
WINDOW_SCAN = "window"
GUMBEL_STUDY = "gumbel"
BLOCKING_STUDY = "blocking"
SLICE3D = "slice3d"
RENDER = "render"
EXTREMES_STUDY = "extremes"  # alias: runs the same study as `gumbel`

EXPERIMENTS = (
    CROSSING_SCAN,
    WINDOW_SCAN,
    GUMBEL_STUDY,
    BLOCKING_STUDY,
    SLICE3D,
    RENDER,
    EXTREMES_STUDY,
)

_KERNEL_KEYS = ("family", "variance", "scale", "omega")
_EXPERIMENT_KEYS = (
    "name",
    "sizes",
    "levels",
    "h_values",
    "rho",
    "replicates",
    "master_seed",
    "workers",
    "search_t",
    "theta",
    "tail_xs",
    "rescaled",
)


@dataclass(frozen=True)
class ExperimentConfig:
    kernel1: KernelSpec
    kernel2: KernelSpec | None = None
    kernel3: KernelSpec | None = None
    eps: float = 0.25
    experiment: str = CROSSING_SCAN
    sizes: tuple[float, ...] = (64.0,)
    levels: tuple[float, ...] = (0.0,)
    h_values: tuple[float, ...] = (0.0,)
    rho: float = 1.0
    replicates: int = 100
    master_seed: int = 1
    workers: int = 1
    search_t: float = 10_000.0
    theta: float = 0.5
    tail_xs: tuple[float, ...] = (1.0, 2.0, 4.0)
    rescaled: bool = False

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not self.eps > 0:
            raise ConfigError("grid spacing eps must be > 0")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ConfigError("sizes must be strictly increasing")
        if not self.sizes:
            raise ConfigError("at least one size is required")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")


def _parse_floats(value: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in value.split(",") if tok.strip() != "")


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse `section.key=value` lines into an ExperimentConfig."""
    kernels: dict[str, dict[str, str]] = {}
    grid: dict[str, str] = {}
    experiment: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected section.key=value")
        dotted, _, value = line.partition("=")
        dotted = dotted.strip()
        value = value.strip()
        if "." not in dotted:
            raise ConfigError(f"line {lineno}: key {dotted!r} lacks a section")
        section, _, key = dotted.partition(".")
        if section in ("kernel1", "kernel2", "kernel3"):
            if key not in _KERNEL_KEYS:
                raise ConfigError(f"line {lineno}: unknown kernel key {key!r}")
            kernels.setdefault(section, {})[key] = value
        elif section == "grid":
            if key != "eps":
                raise ConfigError(f"line {lineno}: unknown grid key {key!r}")
            grid[key] = value
        elif section == "experiment":
            if key not in _EXPERIMENT_KEYS:
                raise ConfigError(f"line {lineno}: unknown experiment key {key!r}")
            experiment[key] = value
        else:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")

    if "kernel1" not in kernels:
        raise ConfigError("kernel1 section is required")

    def build_kernel(section: str) -> KernelSpec:
        fields = kernels[section]
        if "family" not in fields:
            raise ConfigError(f"{section}.family is required")
        try:
            return KernelSpec(
                family=fields["family"],
                variance=float(fields.get("variance", 1.0)),
                scale=float(fields.get("scale", 1.0)),
                omega=float(fields.get("omega", 0.0)),
            )
        except DomainError as exc:
            raise ConfigError(f"{section}: {exc}") from exc

    kwargs: dict = {"kernel1": build_kernel("kernel1")}
    if "kernel2" in kernels:
        kwargs["kernel2"] = build_kernel("kernel2")
    if "kernel3" in kernels:
        kwargs["kernel3"] = build_kernel("kernel3")
    if "eps" in grid:
        kwargs["eps"] = float(grid["eps"])
    try:
        if "name" in experiment:
            kwargs["experiment"] = experiment["name"]
        if "sizes" in experiment:
            kwargs["sizes"] = _parse_floats(experiment["sizes"])
        if "levels" in experiment:
            kwargs["levels"] = _parse_floats(experiment["levels"])
        if "h_values" in experiment:
            kwargs["h_values"] = _parse_floats(experiment["h_values"])
        if "rho" in experiment:
            kwargs["rho"] = float(experiment["rho"])
        if "replicates" in experiment:
            kwargs["replicates"] = int(experiment["replicates"])
        if "master_seed" in experiment:
            kwargs["master_seed"] = int(experiment["master_seed"])
        if "workers" in experiment:
            kwargs["workers"] = int(experiment["workers"])
        if "search_t" in experiment:
            kwargs["search_t"] = float(experiment["search_t"])
        if "theta" in experiment:
            kwargs["theta"] = float(experiment["theta"])
        if "tail_xs" in experiment:
            kwargs["tail_xs"] = _parse_floats(experiment["tail_xs"])
        if "rescaled" in experiment:
            kwargs["rescaled"] = _parse_bool(experiment["rescaled"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_overrides(
    config: ExperimentConfig,
    seed: int | None = None,
    workers: int | None = None,
    experiment: str | None = None,
) -> ExperimentConfig:
    """CLI override hook: flags beat the config file."""
    updates = {}
    if seed is not None:
        updates["master_seed"] = seed
    if workers is not None:
        updates["workers"] = workers
    if experiment is not None:
        updates["experiment"] = experiment
    return replace(config, **updates) if updates else config


__all__ = [
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "with_overrides",
    "EXPERIMENTS",
    "CROSSING_SCAN",
    "WINDOW_SCAN",
    "GUMBEL_STUDY",
    "BLOCKING_STUDY",
    "SLICE3D",
    "RENDER",
    "EXTREMES_STUDY",
]
