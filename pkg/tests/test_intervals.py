import numpy as np

from pla.intervals import build_intervals, sort_pairs


def test_algorithm_order_example():
    iv = build_intervals([[2.0, 1.0], [1.0, 3.0]], 4.0)
    # 0-based form of (2,1), (1,2), (1,1), (2,2)
    assert iv.order == ((1, 0), (0, 1), (0, 0), (1, 1))
    assert iv.breakpoints == (0.0, 1.0, 1.0, 2.0, 3.0, 4.0)
    assert len(iv) == 5
    assert iv.intervals[1] == (1, 1.0, 1.0)


def test_all_equal_costs_use_tie_rules_only():
    assert sort_pairs(np.ones((2, 3))) == [(1, 2), (1, 1), (1, 0), (0, 2), (0, 1), (0, 0)]


def test_single_breakpoint():
    iv = build_intervals([[0.5]], 1.0)
    assert [(lo, hi) for _, lo, hi in iv] == [(0.0, 0.5), (0.5, 1.0)]
    assert iv.locate(0.5) == [0, 1]
    assert iv.locate(0.7) == [1]
