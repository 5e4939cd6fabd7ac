"""Experiment configuration: file loading, overrides and validation."""

import copy
import os
from dataclasses import asdict, dataclass, field

import yaml

from ..channels import CHANNEL_FAMILIES
from ..errors import CapacityError, ConfigError

EXPERIMENTS = ("concentration", "code-run", "iid-sweep", "uncertainty", "pgm", "typicality")

CAPS = {
    "input_dim": 4096,
    "output_dim": 1 << 16,
    "ambient_D": 4096,
}

DEFAULT_PARAMS = {
    "concentration": {"bound": "trA_plus", "D": 512, "epsilon": 0.25, "rank": None, "r": None, "K": 1},
    "code-run": {},
    "iid-sweep": {"n_values": [2, 4, 6], "pgm_threshold": 0.3},
    "uncertainty": {"max_dim_a": 4, "max_dim_b": 4, "max_dim_e": 8, "max_N": 4},
    "pgm": {"dims": [2, 3]},
    "typicality": {"spectrum": [0.2, 0.8], "n_values": [8, 12, 16, 20], "delta": 0.1},
}

DEFAULT_TRIALS = {
    "concentration": 20000,
    "code-run": 50,
    "iid-sweep": 60,
    "uncertainty": 500,
    "pgm": 500,
}


@dataclass
class ChannelSpec:
    family: str = "identity"
    params: dict = field(default_factory=dict)
    d: int = 2
    n: int = 1
    input: object = "maximally_mixed"


@dataclass
class CodeSpec:
    N: object = None
    rate: object = None
    delta: object = None
    eta: float = 0.1


@dataclass
class ExperimentConfig:
    experiment: str
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    code: CodeSpec = field(default_factory=CodeSpec)
    trials: int = 100
    master_seed: int = 0
    output_path: str = "out"
    parallelism: object = 1
    trial_start: int = 0
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def workers(self):
        if self.parallelism == "auto":
            return max(1, os.cpu_count() or 1)
        return int(self.parallelism)


def load_config_file(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError("--config", f"cannot parse: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config file must hold a mapping")
    return data


def apply_override(data, assignment):
    """Set ``a.b.c=value`` in a nested dict; the value is parsed as YAML."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key=value")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigError(key, "empty key segment")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(key, f"cannot parse value {raw!r}") from exc
    node = data
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError(key, f"{p} is not a mapping")
        node = nxt
    node[parts[-1]] = value
    return data


def _int(path, value, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def _num(path, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _known_keys(path, mapping, allowed):
    for k in mapping:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}" if path else k, "unknown key")


def config_from_dict(data):
    """Validate a raw mapping and build an :class:`ExperimentConfig`."""
    data = copy.deepcopy(data)
    _known_keys("", data, {f for f in ExperimentConfig.__dataclass_fields__})
    exp = data.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")

    ch = data.get("channel") or {}
    if not isinstance(ch, dict):
        raise ConfigError("channel", "must be a mapping")
    _known_keys("channel", ch, ChannelSpec.__dataclass_fields__)
    channel = ChannelSpec(**ch)
    if channel.family not in CHANNEL_FAMILIES:
        raise ConfigError("channel.family", f"must be one of {', '.join(CHANNEL_FAMILIES)}")
    _int("channel.d", channel.d, 1)
    _int("channel.n", channel.n, 1)
    if not isinstance(channel.params, dict):
        raise ConfigError("channel.params", "must be a mapping")
    for k, v in channel.params.items():
        if k not in ("p", "g"):
            raise ConfigError(f"channel.params.{k}", "unknown channel parameter")
        if not 0 <= _num(f"channel.params.{k}", v) <= 1:
            raise ConfigError(f"channel.params.{k}", "must lie in [0, 1]")
    if channel.input != "maximally_mixed":
        if not isinstance(channel.input, list) or len(channel.input) != channel.d:
            raise ConfigError("channel.input", "must be 'maximally_mixed' or a length-d spectrum")
        spec = [_num("channel.input", x) for x in channel.input]
        if min(spec) < 0 or abs(sum(spec) - 1) > 1e-9:
            raise ConfigError("channel.input", "spectrum must be a probability vector")

    cd = data.get("code") or {}
    if not isinstance(cd, dict):
        raise ConfigError("code", "must be a mapping")
    _known_keys("code", cd, CodeSpec.__dataclass_fields__)
    code = CodeSpec(**cd)
    if code.N is not None:
        _int("code.N", code.N, 1)
    if code.rate is not None:
        _num("code.rate", code.rate)
    if code.delta is not None and _num("code.delta", code.delta) <= 0:
        raise ConfigError("code.delta", "must be positive")
    if not 0 < _num("code.eta", code.eta) <= 1:
        raise ConfigError("code.eta", "must lie in (0, 1]")

    params = dict(DEFAULT_PARAMS[exp])
    user_params = data.get("params") or {}
    if not isinstance(user_params, dict):
        raise ConfigError("params", "must be a mapping")
    _known_keys("params", user_params, params)
    params.update(user_params)

    default_trials = DEFAULT_TRIALS.get(exp)
    if exp == "typicality":
        default_trials = len(params["n_values"])
    trials = _int("trials", data.get("trials", default_trials), 1)
    seed = _int("master_seed", data.get("master_seed", 0), 0)
    if seed >= 1 << 64:
        raise ConfigError("master_seed", "must fit in 64 bits")
    par = data.get("parallelism", 1)
    if par != "auto":
        _int("parallelism", par, 1)
    cfg = ExperimentConfig(
        experiment=exp,
        channel=channel,
        code=code,
        trials=trials,
        master_seed=seed,
        output_path=str(data.get("output_path", "out")),
        parallelism=par,
        trial_start=_int("trial_start", data.get("trial_start", 0), 0),
        params=params,
    )
    _check_caps(cfg)
    return cfg


def _check_caps(cfg):
    ch = cfg.channel
    if cfg.experiment in ("code-run", "iid-sweep"):
        ns = [ch.n] if cfg.experiment == "code-run" else cfg.params["n_values"]
        if cfg.experiment == "iid-sweep" and (not isinstance(ns, list) or not ns):
            raise ConfigError("params.n_values", "must be a non-empty list")
        out_single = {"erasure": ch.d + 1}.get(ch.family, ch.d)
        env_single = {"identity": 1, "dephasing": 2, "depolarizing": ch.d ** 2,
                      "amplitude_damping": 2, "erasure": ch.d + 1}[ch.family]
        for n in ns:
            _int("params.n_values" if cfg.experiment == "iid-sweep" else "channel.n", n, 1)
            if ch.d ** n > CAPS["input_dim"]:
                raise CapacityError("input_dim", ch.d ** n, CAPS["input_dim"])
            if (out_single * env_single) ** n > CAPS["output_dim"]:
                raise CapacityError("output_dim", (out_single * env_single) ** n, CAPS["output_dim"])
    if cfg.experiment == "concentration":
        p = cfg.params
        if p["bound"] not in ("length", "projector_sum", "trA_plus", "trA_minus"):
            raise ConfigError("params.bound", "unknown bound")
        _int("params.D", p["D"], 1)
        if p["D"] > CAPS["ambient_D"]:
            raise CapacityError("ambient_D", p["D"], CAPS["ambient_D"])
        _num("params.epsilon", p["epsilon"])
        if p["bound"] == "projector_sum" and p["r"] is None:
            raise ConfigError("params.r", "projector_sum needs a projector rank r")
    if cfg.experiment == "typicality":
        if cfg.trial_start + cfg.trials > len(cfg.params["n_values"]):
            raise ConfigError("trials", "typicality runs at most one trial per n value")
