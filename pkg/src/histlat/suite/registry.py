"""Name -> check function registry with shipped default configurations."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable

from ..errors import UnknownCheckError
from ..result import CheckResult
from .config import CheckConfig

CheckFn = Callable[[CheckConfig], CheckResult]


@dataclass
class RegisteredCheck:
    name: str
    func: CheckFn
    description: str
    uses_rng: bool = False
    defaults: list[CheckConfig] = field(default_factory=list)


REGISTRY: dict[str, RegisteredCheck] = {}


def register(name: str, description: str, uses_rng: bool = False):
    def deco(func: CheckFn) -> CheckFn:
        REGISTRY[name] = RegisteredCheck(name, func, description, uses_rng)
        return func

    return deco


def add_default(cfg: dict) -> None:
    c = CheckConfig.from_dict(cfg)
    get(c.check).defaults.append(c)


def get(name: str) -> RegisteredCheck:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownCheckError(name) from None


def names() -> list[str]:
    return sorted(REGISTRY)


def default_configs() -> list[CheckConfig]:
    """Independent copies of every shipped configuration, sorted by name."""
    out = [copy.deepcopy(c) for r in REGISTRY.values() for c in r.defaults]
    return sorted(out, key=lambda c: c.name)
