"""3j symbol tests against sympy's exact implementation and the closed
selection/parity/symmetry rules."""

import math

import numpy as np
import pytest
import sympy.physics.wigner as spw

from zonalsphere.wigner import (ThreeJArgs, column_swap_sign, threej_zero_row,
                                triangle_ok, wigner3j)


def sympy_3j(j1, j2, j3, m1, m2, m3, digits=25):
    return float(spw.wigner_3j(j1, j2, j3, m1, m2, m3).evalf(digits))


class TestTriangle:
    def test_examples(self):
        assert triangle_ok(1, 1, 2)
        assert not triangle_ok(1, 1, 3)
        assert triangle_ok(0, 5, 5)

    def test_symmetric_in_arguments(self):
        for args in [(2, 3, 4), (4, 2, 3), (3, 4, 2)]:
            assert triangle_ok(*args)


class TestWigner3j:
    def test_frozen_values(self):
        assert abs(wigner3j(ThreeJArgs(1, 1, 0, 0, 0, 0))
                   + 1.0 / math.sqrt(3.0)) < 1e-15
        assert abs(wigner3j(ThreeJArgs(1, 1, 2, 0, 0, 0))
                   - math.sqrt(2.0 / 15.0)) < 1e-15

    def test_order_sum_selection_is_exact_zero(self):
        assert wigner3j(ThreeJArgs(1, 1, 2, 1, 1, 0)) == 0.0

    def test_triangle_selection_is_exact_zero(self):
        assert wigner3j(ThreeJArgs(1, 1, 3, 0, 1, -1)) == 0.0

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            ThreeJArgs(1, 1, 2, 2, 0, -2)

    def test_against_sympy_sweep(self, rng):
        checked = 0
        worst = 0.0
        while checked < 120:
            j1 = int(rng.integers(0, 9))
            j2 = int(rng.integers(0, 9))
            j3 = int(rng.integers(abs(j1 - j2), j1 + j2 + 1))
            m1 = int(rng.integers(-j1, j1 + 1))
            m2 = int(rng.integers(-j2, j2 + 1))
            m3 = -m1 - m2
            if abs(m3) > j3:
                continue
            mine = wigner3j(ThreeJArgs(j1, j2, j3, m1, m2, m3))
            worst = max(worst, abs(mine - sympy_3j(j1, j2, j3, m1, m2, m3)))
            checked += 1
        assert worst < 1e-14

    @pytest.mark.parametrize("args", [(100, 100, 100, 2, -5, 3),
                                      (80, 90, 100, -7, 11, -4),
                                      (100, 60, 70, 0, 13, -13)])
    def test_large_degree_accuracy(self, args):
        mine = wigner3j(ThreeJArgs(*args))
        ref = sympy_3j(*args, digits=30)
        assert abs(mine - ref) <= 1e-13 * max(abs(ref), 1e-300)

    def test_orthogonality_sum_rule(self):
        # sum_{m1,m2} (2 j3 + 1) (3j)^2 = 1 for each admissible (j1,j2,j3,m3)
        for (j1, j2, j3) in [(2, 3, 4), (1, 1, 2), (5, 5, 6), (4, 6, 10)]:
            for m3 in range(-j3, j3 + 1):
                total = 0.0
                for m1 in range(-j1, j1 + 1):
                    m2 = -m3 - m1
                    if abs(m2) > j2:
                        continue
                    total += (2 * j3 + 1) * wigner3j(
                        ThreeJArgs(j1, j2, j3, m1, m2, m3)) ** 2
                assert abs(total - 1.0) < 1e-12


class TestZeroRow:
    def test_odd_sum_is_exact_zero(self):
        assert threej_zero_row(1, 1, 1) == 0.0

    def test_matches_general_evaluator(self):
        worst = 0.0
        for j1 in range(11):
            for j2 in range(11):
                for j3 in range(abs(j1 - j2), min(j1 + j2, 10) + 1):
                    worst = max(worst, abs(
                        threej_zero_row(j1, j2, j3)
                        - wigner3j(ThreeJArgs(j1, j2, j3, 0, 0, 0))))
        assert worst < 1e-13

    def test_example_pair(self):
        assert abs(threej_zero_row(2, 1, 1)
                   - wigner3j(ThreeJArgs(2, 1, 1, 0, 0, 0))) < 1e-15
        assert abs(threej_zero_row(4, 2, 2)
                   - wigner3j(ThreeJArgs(4, 2, 2, 0, 0, 0))) < 1e-15

    def test_requires_triangle(self):
        with pytest.raises(ValueError):
            threej_zero_row(5, 1, 1)


class TestColumnSwap:
    def test_signs(self):
        assert column_swap_sign(2, 1, 1) == 1
        assert column_swap_sign(2, 2, 1) == -1

    def test_swap_property_random(self, rng):
        checked = 0
        while checked < 50:
            j1 = int(rng.integers(0, 7))
            j2 = int(rng.integers(0, 7))
            j3 = int(rng.integers(abs(j1 - j2), j1 + j2 + 1))
            m1 = int(rng.integers(-j1, j1 + 1))
            m2 = int(rng.integers(-j2, j2 + 1))
            m3 = -m1 - m2
            if abs(m3) > j3:
                continue
            base = wigner3j(ThreeJArgs(j1, j2, j3, m1, m2, m3))
            swapped = wigner3j(ThreeJArgs(j2, j1, j3, m2, m1, m3))
            sign = column_swap_sign(j1, j2, j3)
            assert abs(swapped - sign * base) < 1e-14
            checked += 1


class TestRatioIdentity:
    def test_shifted_degree_ratio(self):
        """(l k j-1; 000) = (l j k-1; 000) * sqrt(((l+k-j)(l+1+j-k)) /
        ((l+j-k)(l+1+k-j))) for odd j+k+l, wherever the ratio is finite;
        both sides vanish together otherwise."""
        worst = 0.0
        for j in range(1, 16):
            for k in range(1, 16):
                for l in range(16):
                    if (j + k + l) % 2 == 0:
                        continue
                    if not (triangle_ok(l, k, j - 1)
                            and triangle_ok(l, j, k - 1)):
                        continue
                    num = (l + k - j) * (l + 1 + j - k)
                    den = (l + j - k) * (l + 1 + k - j)
                    lhs = threej_zero_row(l, k, j - 1)
                    rhs_base = threej_zero_row(l, j, k - 1)
                    if den <= 0:
                        continue
                    rhs = rhs_base * math.sqrt(num / den)
                    worst = max(worst, abs(lhs - rhs))
        assert worst < 1e-12

    def test_vanishing_pairs_vanish_together(self):
        # with j+k+l odd, triangle admissibility of the two shifted triples
        # is equivalent, so one cannot vanish by triangle without the other
        for j in range(1, 12):
            for k in range(1, 12):
                for l in range(12):
                    if (j + k + l) % 2 == 0:
                        continue
                    a = triangle_ok(l, k, j - 1) and triangle_ok(l, j, k)
                    b = triangle_ok(l, j, k - 1) and triangle_ok(l, k, j)
                    assert a == b
