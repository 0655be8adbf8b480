from hypothesis import strategies as st

from hopda.hostack import Stack

CHARS = ("a", "b", "c")


def stacks(order, chars=CHARS, max_len=3, min_len=0):
    if order == 0:
        return st.sampled_from(chars)
    return st.lists(stacks(order - 1, chars, max_len, min_len), min_size=min_len, max_size=max_len).map(
        lambda xs: Stack(order, xs))


def live_stacks(order, chars=CHARS, max_len=3):
    """Stacks with a top character."""
    return stacks(order, chars, max_len, min_len=1)
