import os
import json
import time
import shutil
import logging
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from functools import lru_cache

from dotenv import load_dotenv  # type: ignore

load_dotenv()

logger = logging.getLogger(__name__)

# Defaults from env; settings.json in IAN_CONFIG_DIR can override the tuning knobs
ENV_DEFAULT_DIGITS = int(os.environ.get('IAN_DEFAULT_DIGITS', '30'))
CONFIG_DIR = os.environ.get('IAN_CONFIG_DIR', os.path.join(os.getcwd(), 'config'))
SETTINGS_PATH = os.path.join(CONFIG_DIR, 'settings.json')
LOG_LEVEL = os.environ.get('IAN_LOG_LEVEL', 'WARNING')
DERIVATIONS_DIR = os.environ.get('IAN_DERIVATIONS_DIR',
                                 os.path.join(os.path.dirname(os.path.abspath(__file__)), 'derivations'))


@dataclass(frozen=True)
class Settings:
    default_digits: int = 30
    # polynomial leaves are bounded on this box; also caps entire series
    radius_cap: Fraction = Fraction(2)
    # translations need |a_i| <= translate_margin * r_i
    translate_margin: Fraction = Fraction(3, 4)
    # radius hint passed down by eval_at: |x_i| / eval_margin
    eval_margin: Fraction = Fraction(7, 8)
    # reciprocal of a polynomial keeps |q(x)| >= recip_slack * |q(0)|
    recip_slack: Fraction = Fraction(1, 16)
    # composition keeps inner sup-bounds below subst_fill * child radius
    subst_fill: Fraction = Fraction(7, 8)
    shrink_factor: Fraction = Fraction(3, 4)
    shrink_steps: int = 64
    eval_start_order: int = 8
    eval_start_prec: int = 64
    eval_max_order: int = 8192
    window_x_order: int = 8
    window_n_extra: int = 8
    root_refine_bits: int = 24


def _coerce(name: str, raw):
    kind = {f.name: f.type for f in fields(Settings)}[name]
    if kind in (Fraction, 'Fraction'):
        return Fraction(str(raw))
    return int(raw)


def load_settings(path: str = SETTINGS_PATH) -> Settings:
    base = Settings(default_digits=ENV_DEFAULT_DIGITS)
    if not os.path.exists(path):
        return base
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        known = {f.name for f in fields(Settings)}
        overrides = {k: _coerce(k, v) for k, v in data.items() if k in known}
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning("Ignoring unknown settings keys: %s", ', '.join(unknown))
        return replace(base, **overrides)
    except Exception as e:
        # Back up the bad file and continue with defaults
        try:
            ts = time.strftime('%Y%m%d-%H%M%S')
            shutil.copy2(path, f"{path}.bad-{ts}")
        except Exception:
            pass
        logger.warning("Failed to load %s (%s); using defaults", path, e)
        return base


def save_settings(cfg: Settings, path: str = SETTINGS_PATH):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    data = {}
    for f in fields(Settings):
        v = getattr(cfg, f.name)
        data[f.name] = str(v) if isinstance(v, Fraction) else v
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(data, fh, indent=2)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()


def reload_settings() -> Settings:
    get_settings.cache_clear()
    return get_settings()
