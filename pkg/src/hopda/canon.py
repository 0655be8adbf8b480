"""Canonical total order over the heterogeneous identifiers used as controls,
characters and states, so that every output is reproducible regardless of
hash seeds."""


def skey(x):
    if isinstance(x, str):
        return (1, x)
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, tuple):
        return (2, tuple(skey(y) for y in x))
    if isinstance(x, (frozenset, set)):
        return (3, tuple(sorted(skey(y) for y in x)))
    if x is None:
        return (-1,)
    k = getattr(x, "sort_key", None)
    if k is not None:
        return (4, k())
    return (5, repr(x))


def csorted(xs):
    return sorted(xs, key=skey)
