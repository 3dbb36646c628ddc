# config.py - PA Forge
# Environment-driven settings, read once at import.
# A .env next to the code is loaded first; variables already set in the environment win.

import os
from pathlib import Path


BASE_DIR = Path(__file__).resolve().parent
ENV_PREFIX = "PA_FORGE_"


def _load_dotenv(path: Path) -> None:
    if not path.is_file():
        return
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError:
        return
    for raw in lines:
        line = raw.strip()
        if line.startswith("export "):
            line = line[len("export "):].lstrip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, val = (part.strip() for part in line.split("=", 1))
        if key and key not in os.environ:
            os.environ[key] = val.strip("'\"")


_load_dotenv(BASE_DIR / ".env")


def _env(name: str, default: str = "") -> str:
    return os.getenv(ENV_PREFIX + name, default).strip()


def _env_bool(name: str, default: bool = False) -> bool:
    val = os.getenv(ENV_PREFIX + name)
    if val is None:
        return default
    return val.strip().lower() in ("1", "true", "yes", "on")


def _env_int(name: str, default: int, minimum: int = 0) -> int:
    # Unparsable or out-of-range values fall back to the default.
    try:
        val = int(_env(name) or default)
    except ValueError:
        return default
    return val if val >= minimum else default


def _resolve_dir(value: str) -> str:
    # "" means no on-disk cache.
    if not value:
        return ""
    p = Path(value).expanduser()
    return str(p if p.is_absolute() else BASE_DIR / p)


APP_NAME = _env("APP_NAME", "PA Forge")
APP_VERSION = _env("APP_VERSION", "0.1.0")
APP_ENV = _env("ENV", "development").lower()

DEBUG = _env_bool("DEBUG", APP_ENV in ("dev", "development", "local"))
LOG_LEVEL = _env("LOG_LEVEL", "DEBUG" if DEBUG else "INFO").upper() or "INFO"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

# Serialized twiddle tables (ntt_<size>.npz).
PLAN_CACHE_DIR = _resolve_dir(_env("PLAN_CACHE"))

DEFAULT_RADIX = _env_int("DEFAULT_RADIX", 16, minimum=2)
SECURITY_BITS = _env_int("SECURITY_BITS", 100)
BENCH_TRIALS = _env_int("BENCH_TRIALS", 5, minimum=1)
BENCH_THREADS = _env_int("BENCH_THREADS", 1, minimum=1)
