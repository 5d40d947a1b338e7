import random

from polyvault import gf2m, vault

# One line per acceptance criterion, filled in by tests/test_acceptance.py and
# echoed after the run so the pass/fail record survives pytest's capture.
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


def make_pair(gf, t, s, k, omega, rng, variant="probabilistic"):
    """Record pair from feature sets with exactly omega common elements.

    Returns (set_a, set_b, rec_a, rec_b).
    """
    pts = gf.rand_distinct(t + s - omega, rng)
    a = sorted(pts[:t])
    b = sorted(pts[:omega] + pts[t:])
    if variant == "deterministic":
        rec_a = vault.enroll_deterministic(gf, a, k)
        rec_b = vault.enroll_deterministic(gf, b, k)
    else:
        rec_a, _ = vault.enroll_probabilistic(gf, a, k, rng)
        rec_b, _ = vault.enroll_probabilistic(gf, b, k, rng)
    return frozenset(a), frozenset(b), rec_a, rec_b


def seeded(seed) -> random.Random:
    return random.Random(seed)


def small_field() -> gf2m.GF2m:
    return gf2m.field(4)
