"""Constructive chain covers: the height walk and the primitive-obstruction cover."""

from __future__ import annotations

from dataclasses import dataclass, field

from .modular import ResidueVector, height
from .poset import ChainCover, Poset, build_primitive_poset, build_s_poset, validate_cover, width_exact


@dataclass
class CoverReport:
    kind: str
    poset: Poset
    cover: ChainCover
    bound: int
    generator: tuple[int, ...] | int
    details: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.cover)

    def to_dict(self, t: ResidueVector, with_width: bool = True) -> dict:
        out = {**t.to_dict(), "kind": self.kind, "cover_size": len(self.cover), "bound": self.bound}
        if with_width:
            out["width"] = width_exact(self.poset).width
        return out


def toy_chain_cover(t: ResidueVector) -> CoverReport:
    """Walk ``k u`` for k = 1..p-1 where u is the height-minimising multiple of t.

    A new chain starts whenever some coordinate wraps modulo p; the origin is
    prepended to the first chain.  At most ``u_1 + ... + u_d <= d h_p`` chains.
    """
    p = t.p
    hp = height(t)
    a = hp.witness
    u = t.multiple(a)
    assert max(u) == hp.value
    P = build_s_poset(t)  # element index == k
    chains: list[list[int]] = [[0]]
    prev = (0,) * t.d
    wraps = 0
    for k in range(1, p):
        cur = tuple((k * x) % p for x in u)
        if k > 1 and any(c < q for c, q in zip(cur, prev)):
            chains.append([])
            wraps += 1
        chains[-1].append((k * a) % p)
        prev = cur
    cover = ChainCover(tuple(tuple(c) for c in chains))
    validate_cover(P, cover)
    bound = t.d * hp.value
    assert len(cover) == 1 + wraps <= sum(u) <= bound
    return CoverReport("toy", P, cover, bound, u,
                       {"hp": hp.value, "wraps": wraps, "u_sum": sum(u)})


class InadmissibleError(ValueError):
    pass


def primitive_chain_cover(t: ResidueVector) -> CoverReport:
    """Chains ``a, a + l, a + 2l, ...`` through the primitive-obstruction poset.

    ``l`` is the height witness of ``(t_1 - 1, ..., t_{d-1} - 1, 1)`` (or 1 when
    that height exceeds p/2), which makes ``(t_i l) % p >= l``.  A chain is cut
    where ``(t_i a) % p + (t_i l) % p >= p`` for some i.
    """
    p, d = t.p, t.d
    if any(c < 2 for c in t.coords):
        raise InadmissibleError(f"primitive cover needs every t_i >= 2, got {t.coords}")
    shifted = ResidueVector(p, d, tuple(c - 1 for c in t.coords))
    hs = height(shifted)
    h_shift = hs.value
    l = 1 if 2 * h_shift > p else hs.witness
    steps = tuple((c * l) % p for c in t.coords)
    assert all(s >= l for s in steps)
    if l != 1:
        assert all(s == ((c - 1) * l) % p + l for s, c in zip(steps, t.coords))

    P = build_primitive_poset(t)
    members = set(P.k_indices)
    chains: list[list[int]] = []
    placed: set[int] = set()
    for a0 in sorted(members):
        if a0 in placed:
            continue
        chain, a = [a0], a0
        while True:
            nxt = a + l
            if nxt >= p or nxt not in members:
                break
            res = [(c * a) % p for c in t.coords]
            if any(r + s >= p for r, s in zip(res, steps)):
                break
            assert all((c * nxt) % p == r + s for c, r, s in zip(t.coords, res, steps))
            chain.append(nxt)
            a = nxt
        placed.update(chain)
        chains.append(chain)
    cover = ChainCover(tuple(tuple(P.index_of_k(k) for k in ch) for ch in chains))
    validate_cover(P, cover)
    construction_bound = l + sum(steps)
    bound = (2 * d - 1) * h_shift
    assert len(cover) <= construction_bound <= max(bound, (d - 1) * p)
    return CoverReport("primitive", P, cover, bound, l,
                       {"h_shift": h_shift, "construction_bound": construction_bound, "steps": steps})
