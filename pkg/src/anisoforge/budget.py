"""Default search and scan budgets.

``ANISOFORGE_BUDGET`` in the environment overrides every default cap.
"""

import os

DEFAULT_SEARCH_BUDGET = 10**7
DEFAULT_SCAN_BUDGET = 10**7
DEFAULT_FACTOR_LIMIT = 10**6


def _env_budget():
    raw = os.environ.get("ANISOFORGE_BUDGET")
    if raw is None or not raw.strip():
        return None
    value = int(raw)
    if value < 1:
        raise ValueError("ANISOFORGE_BUDGET must be a positive integer")
    return value


def search_budget(explicit=None):
    if explicit is not None:
        return explicit
    return _env_budget() or DEFAULT_SEARCH_BUDGET


def scan_budget(explicit=None):
    if explicit is not None:
        return explicit
    return _env_budget() or DEFAULT_SCAN_BUDGET
