"""Explicit family trees and the surface kinship relation between two people.

Relations are read off the tree by definition (blood uncles and aunts only,
full siblings only, no step-relations). Used to build the kinship rule table
and to generate gold samples whose answers are known by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MALE_NAMES = (
    "Edd Washington Bird Friend Rollie Young Leonard Miles Nick Tony Ellsworth Hampton "
    "Chester Orville Travis Nicholas Elizabeth Vernon Eric Arthur Carl Kyle Ronald Henry "
    "Edward Allen Eddie Michael Maynard Dana Lewis Terry Aaron Barney Calvin Dexter Emmett "
    "Floyd Gilbert Harvey Irving Jasper Kermit Lloyd Milton Norris Oscar Percy Quentin "
    "Rufus Sidney Truman Ulysses Virgil Wallace Xavier Yale Zeke Abner Basil Clyde Dudley "
    "Elmer Fletcher Grover Homer Ike Jethro Lester Morris Ned Otis"
).split()

FEMALE_NAMES = (
    "Marion Ottilia Christine May Abbie Rose Ella Genevieve Daisie Serena Rachael Hessie "
    "Maymie Michelle Theresa Marlene Kristen Raquel Constance Margaret Shirley Amanda Avis "
    "Alberta Karen Corine Lou Dollie Elsie Mozella Leila Agnes Bertha Clara Dorothy Edna "
    "Florence Gladys Hazel Irene Josephine Katherine Lillian Mabel Nellie Opal Pearl "
    "Ruth Sadie Thelma Una Viola Winifred Yvonne Zelda Alma Beulah Cora Della Effie Flora "
    "Greta Hattie Ida Jessie Lena Minnie Nora Olive"
).split()


@dataclass
class Person:
    id: str
    gender: str
    father: str | None = None
    mother: str | None = None
    spouse: str | None = None


@dataclass
class FamilyTree:
    people: dict[str, Person] = field(default_factory=dict)

    def add(self, person: Person) -> Person:
        self.people[person.id] = person
        return person

    def marry(self, a: str, b: str) -> None:
        self.people[a].spouse = b
        self.people[b].spouse = a

    def _index(self) -> None:
        self._parents = {
            pid: {p for p in (person.father, person.mother) if p} for pid, person in self.people.items()
        }
        self._children: dict[str, set[str]] = {pid: set() for pid in self.people}
        for pid, parents in self._parents.items():
            for parent in parents:
                self._children[parent].add(pid)
        self._siblings = {}
        for pid, parents in self._parents.items():
            sibs = set()
            for parent in parents:
                sibs |= self._children[parent]
            sibs.discard(pid)
            self._siblings[pid] = sibs
        self._grand = {pid: self._up(pid, 2) for pid in self.people}
        self._great = {pid: self._up(pid, 3) for pid in self.people}

    def _up(self, pid: str, levels: int) -> set[str]:
        frontier = {pid}
        for _ in range(levels):
            frontier = set().union(*(self._parents[p] for p in frontier)) if frontier else set()
        return frontier

    def relation(self, x: str, y: str) -> str | None:
        """The kinship label ``r`` such that "y is x's r", or None if none applies."""
        if not hasattr(self, "_parents") or len(self._parents) != len(self.people):
            self._index()
        if x == y:
            return None
        female = self.people[y].gender == "female"

        def pick(male_label: str, female_label: str) -> str:
            return female_label if female else male_label

        if y in self._parents[x]:
            return pick("father", "mother")
        if x in self._parents[y]:
            return pick("son", "daughter")
        if self.people[x].spouse == y:
            return pick("husband", "wife")
        if y in self._siblings[x]:
            return pick("brother", "sister")
        if y in self._grand[x]:
            return pick("grandfather", "grandmother")
        if x in self._grand[y]:
            return pick("grandson", "granddaughter")
        if y in self._great[x]:
            return pick("greatgrandfather", "greatgrandmother")
        if x in self._great[y]:
            return pick("greatgrandson", "greatgranddaughter")
        if any(y in self._siblings[p] for p in self._parents[x]):
            return pick("uncle", "aunt")
        if any(x in self._siblings[p] for p in self._parents[y]):
            return pick("nephew", "niece")
        if any(self.people[c].spouse == y for c in self._children[x]):
            return pick("son-in-law", "daughter-in-law")
        spouse = self.people[x].spouse
        if spouse is not None and y in self._parents[spouse]:
            return pick("father-in-law", "mother-in-law")
        return None

    def related_pairs(self) -> dict[tuple[str, str], str]:
        out = {}
        ids = list(self.people)
        for x in ids:
            for y in ids:
                rel = self.relation(x, y)
                if rel is not None:
                    out[(x, y)] = rel
        return out


class _Namer:
    def __init__(self, rng: np.random.Generator) -> None:
        self._pools = {
            "male": list(rng.permutation(MALE_NAMES)),
            "female": list(rng.permutation(FEMALE_NAMES)),
        }
        self._extra = 0

    def __call__(self, gender: str) -> str:
        pool = self._pools[gender]
        if pool:
            return str(pool.pop())
        self._extra += 1
        return f"Person{self._extra}"


def random_family(
    rng: np.random.Generator,
    generations: int = 4,
    max_people: int = 40,
    marry_prob: float = 0.7,
    inlaw_parents_prob: float = 0.5,
) -> FamilyTree:
    """Grow a random non-inbred family tree from one founding couple."""
    tree = FamilyTree()
    name = _Namer(rng)

    def person(gender: str, **kw) -> Person:
        return tree.add(Person(name(gender), gender, **kw))

    def gender() -> str:
        return "male" if rng.random() < 0.5 else "female"

    founders = (person("male"), person("female"))
    tree.marry(founders[0].id, founders[1].id)
    couples = [(founders[0].id, founders[1].id, 0)]
    while couples:
        father, mother, gen = couples.pop(0)
        if gen >= generations - 1:
            continue
        for _ in range(int(rng.integers(1, 4))):
            if len(tree.people) >= max_people:
                return tree
            child = person(gender(), father=father, mother=mother)
            if rng.random() >= marry_prob or len(tree.people) >= max_people:
                continue
            other = "female" if child.gender == "male" else "male"
            if rng.random() < inlaw_parents_prob and len(tree.people) + 3 <= max_people:
                # the outsider arrives with parents and possibly a sibling
                pa, ma = person("male"), person("female")
                tree.marry(pa.id, ma.id)
                spouse = person(other, father=pa.id, mother=ma.id)
                if rng.random() < 0.5:
                    person(gender(), father=pa.id, mother=ma.id)
            else:
                spouse = person(other)
            tree.marry(child.id, spouse.id)
            if child.gender == "male":
                couples.append((child.id, spouse.id, gen + 1))
            else:
                couples.append((spouse.id, child.id, gen + 1))
    return tree
