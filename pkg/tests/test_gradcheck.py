import numpy as np
import pytest

from tagrank.embedding import Activation
from tagrank.errors import GradientError
from tagrank.gradcheck import (GradCheckOp, check_all, grad_check,
                               gradcheck_case)


class TestGradCheck:
    def test_linear_identity_case_is_exact(self):
        # quadratic loss of a linear op: central differences are exact
        params, inputs = gradcheck_case(GradCheckOp.AGGREGATE, seed=0,
                                        activation=Activation.IDENTITY)
        assert grad_check(GradCheckOp.AGGREGATE, params, inputs, 1e-5) <= 1e-8

    @pytest.mark.parametrize("op", list(GradCheckOp))
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_all_ops_within_tolerance(self, op, seed):
        params, inputs = gradcheck_case(op, seed)
        assert grad_check(op, params, inputs, 1e-5) <= 1e-4

    def test_check_all_covers_every_op(self):
        results = check_all(seed=7)
        assert set(results) == {op.value for op in GradCheckOp}
        assert all(v <= 1e-4 for v in results.values())

    def test_epsilon_range_enforced(self):
        params, inputs = gradcheck_case(GradCheckOp.FUSION, seed=0)
        with pytest.raises(ValueError):
            grad_check(GradCheckOp.FUSION, params, inputs, epsilon=1e-2)

    def test_nonfinite_gradient_reported(self):
        params, inputs = gradcheck_case(GradCheckOp.AGGREGATE, seed=0)
        params["w"][0, 0] = np.nan
        with pytest.raises(GradientError) as err:
            grad_check(GradCheckOp.AGGREGATE, params, inputs)
        assert "aggregate" in str(err.value)

    def test_relu_activation_supported(self):
        params, inputs = gradcheck_case(GradCheckOp.FUSION, seed=3,
                                        activation=Activation.RELU)
        assert grad_check(GradCheckOp.FUSION, params, inputs, 1e-5) <= 1e-4
