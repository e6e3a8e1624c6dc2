"""Flat ``key=value`` run configuration.

Precedence is command-line flag > config file > built-in default. Every
seed (``kmeans_seed``, ``train_seed``, ``cv_seed``, ``synth_seed``) falls back
to the global ``seed`` when not set explicitly.
"""

from .errors import ConfigError, InvalidParameterError
from .features import PipelineConfig
from .glcm import DEFAULT_ORIENTATIONS, GlcmConfig
from .som import TrainConfig


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _orientations(text):
    if isinstance(text, (list, tuple)):
        return tuple(text)
    out = []
    for part in str(text).split(";"):
        dr, dc = part.split(",")
        out.append((int(dr), int(dc)))
    return tuple(out)


def _map_sizes(text):
    if isinstance(text, (list, tuple)):
        return tuple(text)
    sizes = []
    for part in str(text).split(","):
        r, _, c = part.strip().lower().partition("x")
        sizes.append((int(r), int(c or r)))
    return tuple(sizes)


def _radius(text):
    if text is None or str(text).strip().lower() in ("", "auto", "none"):
        return None
    return float(text)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return v


# key -> (parser, default)
SCHEMA = {
    "seed": (_seed, 0),
    "jobs": (int, 1),
    # GLCM
    "levels": (int, 32),
    "distance": (int, 1),
    "orientations": (_orientations, DEFAULT_ORIENTATIONS),
    "symmetric": (_bool, True),
    "normalize": (_bool, True),
    # bloc-wise pipeline
    "sn": (int, 6),
    "m_blocs": (int, 8),
    "l_clusters": (int, 3),
    "kmeans_seed": (_seed, None),
    "kmeans_max_iter": (int, 100),
    "center_crop": (float, 1.0),
    # training
    "rows": (int, 10),
    "cols": (int, 10),
    "epochs": (int, 100),
    "eta0": (float, 0.5),
    "radius0": (_radius, None),
    "train_seed": (_seed, None),
    "shuffle": (_bool, True),
    "cutoff": (float, 1e-3),
    "match_rule": (_choice("instance", "bmu"), "instance"),
    "increment_rule": (_choice("selected", "bmu_only"), "bmu_only"),
    "reset_wcc_each_epoch": (_bool, True),
    # evaluation
    "model": (_choice("som", "isom", "both"), "isom"),
    "map_sizes": (_map_sizes, ((10, 10), (15, 15), (20, 20), (25, 25))),
    "folds": (int, 10),
    "cv_seed": (_seed, None),
    # synthetic data
    "n_per_class": (int, 100),
    "dim": (int, 8),
    "separation": (float, 5.0),
    "spread": (float, 0.5),
    "synth_seed": (_seed, None),
}
SEED_KEYS = ("kmeans_seed", "train_seed", "cv_seed", "synth_seed")


def parse_value(key, raw):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    parser = SCHEMA[key][0]
    try:
        return parser(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def parse_config_text(text, source="<config>"):
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        values[key.strip()] = parse_value(key.strip(), raw.strip())
    return values


def load_config_file(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))


def resolve(file_values=None, flag_values=None):
    """Merge defaults, config-file values and flags (already parsed)."""
    cfg = {k: default for k, (_, default) in SCHEMA.items()}
    for layer in (file_values or {}, flag_values or {}):
        for k, v in layer.items():
            if k not in SCHEMA:
                raise ConfigError(f"unknown config key {k!r}")
            if v is not None:
                cfg[k] = v
    for k in SEED_KEYS:
        if cfg[k] is None:
            cfg[k] = cfg["seed"]
    if cfg["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    return cfg


def format_config(cfg):
    """Single-line ``key=value`` rendering that :func:`parse_config_text` can read back per item."""
    def show(k, v):
        if k == "orientations":
            return ";".join(f"{a},{b}" for a, b in v)
        if k == "map_sizes":
            return ",".join(f"{r}x{c}" for r, c in v)
        if v is None:
            return "auto"
        return str(v).lower() if isinstance(v, bool) else str(v)
    return " ".join(f"{k}={show(k, cfg[k])}" for k in SCHEMA)


def _wrap(build):
    try:
        return build()
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from None


def glcm_config(cfg):
    return _wrap(lambda: GlcmConfig(
        levels=cfg["levels"], distance=cfg["distance"], orientations=cfg["orientations"],
        symmetric=cfg["symmetric"], normalize=cfg["normalize"],
    ))


def pipeline_config(cfg):
    g = glcm_config(cfg)
    return _wrap(lambda: PipelineConfig(
        sn=cfg["sn"], m_blocs=cfg["m_blocs"], l_clusters=cfg["l_clusters"],
        kmeans_seed=cfg["kmeans_seed"], kmeans_max_iter=cfg["kmeans_max_iter"],
        center_crop=cfg["center_crop"], glcm=g,
    ))


def train_config(cfg):
    return _wrap(lambda: TrainConfig(
        epochs=cfg["epochs"], eta0=cfg["eta0"], radius0=cfg["radius0"], seed=cfg["train_seed"],
        shuffle=cfg["shuffle"], cutoff=cfg["cutoff"], match_rule=cfg["match_rule"],
        increment_rule=cfg["increment_rule"], reset_wcc_each_epoch=cfg["reset_wcc_each_epoch"],
    ))


def check_map_sizes(sizes):
    for r, c in sizes:
        if r < 1 or c < 1:
            raise ConfigError(f"invalid map size {r}x{c}")
    return sizes
