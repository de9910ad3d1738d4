"""Bundled synthetic movie catalog."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

ANY = "any"


@dataclass(frozen=True)
class Movie:
    title: str
    attributes: tuple[tuple[str, str], ...]

    def get(self, slot: str) -> str | None:
        return dict(self.attributes).get(slot)


@dataclass(frozen=True)
class Catalog:
    slots: tuple[str, ...]
    items: tuple[Movie, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("catalog is empty")
        titles = [m.title for m in self.items]
        if len(set(titles)) != len(titles):
            raise ValueError("catalog titles must be unique")
        for m in self.items:
            for slot, _ in m.attributes:
                if slot not in self.slots:
                    raise ValueError(f"{m.title!r} uses unregistered slot {slot!r}")

    def values(self, slot: str) -> list[str]:
        return sorted({v for m in self.items for s, v in m.attributes if s == slot})

    def by_title(self, title: str) -> Movie:
        for m in self.items:
            if m.title == title:
                return m
        raise KeyError(title)

    def matching(self, prefs: Mapping[str, str]) -> list[Movie]:
        """Items agreeing with every preference; ``any`` values do not filter."""
        active = {s: v for s, v in prefs.items() if v != ANY}
        return [m for m in self.items if all(m.get(s) == v for s, v in active.items())]


def catalog_from_dict(obj: dict) -> Catalog:
    slots = tuple(obj["slots"])
    items = tuple(
        Movie(it["title"], tuple((s, it[s]) for s in slots if s in it)) for it in obj["items"]
    )
    return Catalog(slots, items)


def make_catalog(slots: Sequence[str], rows: Sequence[Mapping[str, str]]) -> Catalog:
    return catalog_from_dict({"slots": list(slots), "items": list(rows)})


@functools.lru_cache(maxsize=None)
def default_catalog() -> Catalog:
    text = resources.files("convo_breakdown").joinpath("data").joinpath("catalog.json").read_text(encoding="utf-8")
    return catalog_from_dict(json.loads(text))
