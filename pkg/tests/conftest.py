import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from monoid_embed.tree import Node, TruncationConfig, Word

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def n(eta, phi):
    """Shorthand: n("01", "10") is the node with eta (0, 1) and phi (1, 0)."""
    return Node(tuple(int(c) for c in eta), tuple(int(c) for c in phi))


def nodes_in(cfg: TruncationConfig):
    @st.composite
    def draw(data):
        d = data(st.integers(1, cfg.depth))
        eta = tuple(data(st.integers(0, cfg.kappa - 1)) for _ in range(d))
        phi = tuple(data(st.integers(0, 1)) for _ in range(d))
        return Node(eta, phi)

    return draw()


def words_in(cfg: TruncationConfig, max_size: int = 4):
    return st.lists(nodes_in(cfg), max_size=max_size).map(Word)


SMALL = TruncationConfig(kappa=2, depth=3)
CHAIN2 = TruncationConfig(kappa=1, depth=3)
