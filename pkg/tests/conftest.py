import pytest

from gromovlab.complex import build_complex, with_fixed_paths
from gromovlab.decorate import AbstractDiagram, Decoration


def diagram(K, l, gluing=(), classes=None, first=None, orient=None, paths=()):
    Y = build_complex(K, l, gluing)
    deco = Decoration.make(classes or list(range(1, K + 1)), first or [1] * K, orient or [1] * K)
    return AbstractDiagram(with_fixed_paths(Y, paths), deco)


@pytest.fixture
def make_diagram():
    return diagram


def random_instance(rng, max_K=3, max_l=4, max_R=6):
    """A random small diagram and presentation over two generators; about
    half the presentations have a fulfilling tuple planted in them."""
    from gromovlab.decorate import has_reduction_pair
    from gromovlab.fulfill import is_fulfilled_by
    from gromovlab.words import enumerate_reduced_words

    K, l = rng.randint(1, max_K), rng.randint(2, max_l)
    sides = [(f, p) for f in range(K) for p in range(1, l + 1)]
    rng.shuffle(sides)
    pairs = rng.randint(0, min(2, len(sides) // 2))
    g = [(sides[2 * i], sides[2 * i + 1], rng.random() < 0.5) for i in range(pairs)]
    A = diagram(K, l, g, classes=[rng.randint(1, K) for _ in range(K)],
                first=[rng.randint(1, l) for _ in range(K)],
                orient=[rng.choice([1, -1]) for _ in range(K)])
    words = enumerate_reduced_words(2, l)
    R = [rng.choice(words) for _ in range(rng.randint(1, max_R))]
    if rng.random() < 0.5 and len(R) >= A.n and not has_reduction_pair(A):
        for _ in range(200):
            idx = rng.sample(range(len(R)), A.n)
            trial = list(R)
            for i in idx:
                trial[i] = rng.choice(words)
            if is_fulfilled_by(A, trial, dict(zip(range(1, A.n + 1), idx))):
                R = trial
                break
    return A, R
