import numpy as np
from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# filled by test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def prob_vectors(draw, dim=None, min_dim=2, max_dim=6, zeros=True):
    d = draw(st.integers(min_dim, max_dim)) if dim is None else dim
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=d, max_size=d))
    w = np.array(w)
    if not zeros:
        w = w + 1e-3
    if w.sum() <= 1e-9:
        w = np.ones(d)
    return w / w.sum()


@st.composite
def prob_pairs(draw, min_dim=2, max_dim=6, full_q=True):
    d = draw(st.integers(min_dim, max_dim))
    return draw(prob_vectors(dim=d)), draw(prob_vectors(dim=d, zeros=not full_q))


seeds = st.integers(0, 2**32 - 1)
