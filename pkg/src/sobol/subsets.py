"""Variable subsets U of the index set {1, ..., Np}."""

from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple, Union

from errors import ConfigError


@dataclass(frozen=True)
class SubsetU:
    """Non-empty subset of variables, numbered from 1.

    Attributes:
        members: Sorted variable numbers
        dim: Number of variables Np
    """
    members: Tuple[int, ...]
    dim: int

    def __post_init__(self):
        members = tuple(sorted(set(int(i) for i in self.members)))
        if not members:
            raise ConfigError(["subsets: a subset must contain at least one variable"])
        bad = [i for i in members if not 1 <= i <= self.dim]
        if bad:
            raise ConfigError([f"subsets: variables {bad} outside 1..{self.dim}"])
        object.__setattr__(self, "members", members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def columns(self) -> Tuple[int, ...]:
        """Zero-based columns of the parameter matrix."""
        return tuple(i - 1 for i in self.members)

    @property
    def complement_members(self) -> Tuple[int, ...]:
        return tuple(i for i in range(1, self.dim + 1) if i not in self.members)

    @property
    def is_full(self) -> bool:
        return len(self.members) == self.dim

    def complement(self) -> "SubsetU":
        """U^c; undefined (ConfigError) when U is every variable."""
        return SubsetU(self.complement_members, self.dim)

    def label(self, param_names: Sequence[str] = ()) -> str:
        if len(param_names) == self.dim:
            return "+".join(param_names[i - 1] for i in self.members)
        return "+".join(f"xi{i}" for i in self.members)

    @classmethod
    def parse(cls, spec: Union[str, int, Sequence[Union[str, int]]], param_names: Sequence[str]) -> "SubsetU":
        """Build a subset from names or 1-based numbers, e.g. ``"beta_H,kappa_L"`` or ``[1, 3]``."""
        items = spec.split(",") if isinstance(spec, str) else ([spec] if isinstance(spec, int) else list(spec))
        members = []
        for item in items:
            if isinstance(item, str):
                item = item.strip()
                if item in param_names:
                    members.append(list(param_names).index(item) + 1)
                    continue
                if not item.isdigit():
                    raise ConfigError([f"subsets: unknown variable '{item}', expected one of {list(param_names)}"])
            members.append(int(item))
        return cls(tuple(members), len(param_names))


def singletons(dim: int):
    """Every one-variable subset, in variable order."""
    return [SubsetU((i,), dim) for i in range(1, dim + 1)]
