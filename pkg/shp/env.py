from __future__ import annotations

import os


def env_flag(name, default=None):
    """
    Accepts environment variables formatted as y/n, yes/no, 1/0, true/false,
    on/off, and returns it as a boolean.

    If the environment variable is not defined, or has an unknown value,
    returns `default`
    """
    value = os.environ.get(name)
    if value is None:
        return default

    value = value.lower().strip()
    if value in ('y', 'yes', '1', 'true', 'on'):
        return True
    elif value in ('n', 'no', '0', 'false', 'off'):
        return False
    return default


def env_int(name, default=None, minimum=None):
    """
    Returns the environment variable `name` as an integer.

    Unparseable values and values below `minimum` give `default`.
    """
    value = os.environ.get(name)
    if value is None:
        return default

    try:
        number = int(value.strip())
    except ValueError:
        return default

    if minimum is not None and number < minimum:
        return default
    return number


def default_threads() -> int:
    """Worker cap used when no `--threads` flag is given."""
    return env_int('SHP_THREADS', default=1, minimum=1)


def default_progress() -> bool:
    """Whether long running commands show a progress bar by default."""
    return bool(env_flag('SHP_PROGRESS', default=False))
