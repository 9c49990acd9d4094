import json
import os
from fractions import Fraction

from settings import Settings, get_settings, load_settings, reload_settings, save_settings


def test_defaults_without_file(tmp_path):
    cfg = load_settings(str(tmp_path / 'missing.json'))
    assert cfg.translate_margin == Fraction(3, 4)
    assert cfg.eval_margin == Fraction(7, 8)
    assert cfg.radius_cap == 2


def test_overrides_are_coerced(tmp_path):
    path = tmp_path / 'settings.json'
    path.write_text(json.dumps({'translate_margin': '1/2', 'shrink_steps': '10', 'bogus': 1}), encoding='utf-8')
    cfg = load_settings(str(path))
    assert cfg.translate_margin == Fraction(1, 2)
    assert cfg.shrink_steps == 10


def test_malformed_file_is_backed_up(tmp_path):
    path = tmp_path / 'settings.json'
    path.write_text('{not json', encoding='utf-8')
    cfg = load_settings(str(path))
    assert cfg == Settings(default_digits=cfg.default_digits)
    backups = [p for p in os.listdir(tmp_path) if p.startswith('settings.json.bad-')]
    assert len(backups) == 1


def test_save_then_load(tmp_path):
    path = str(tmp_path / 'cfg' / 'settings.json')
    save_settings(Settings(recip_slack=Fraction(1, 8), eval_max_order=100), path)
    cfg = load_settings(path)
    assert cfg.recip_slack == Fraction(1, 8)
    assert cfg.eval_max_order == 100


def test_get_settings_is_cached_until_reload():
    first = get_settings()
    assert get_settings() is first
    assert reload_settings() is not first
