import numpy as np
import pytest

from seqrac.errors import DimensionMismatch, InvalidObject
from seqrac.objects import DensityMatrix, KrausInstrument, Povm, Preparation, StrategyBundle, from_bloch
from seqrac.qubit import binary_povm, canonical_preparations, lueders_instrument


def test_density_matrix_validation():
    rho = DensityMatrix(np.eye(2) / 2)
    assert rho.dim == 2
    assert rho.purity() == pytest.approx(0.5)
    with pytest.raises(InvalidObject):
        DensityMatrix(np.eye(2))
    with pytest.raises(InvalidObject):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidObject):
        DensityMatrix(np.array([[0.5, 0.5], [0, 0.5]]))


def test_arrays_are_read_only():
    rho = DensityMatrix(np.eye(2) / 2)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


def test_bloch_round_trip():
    r = np.array([0.3, -0.2, 0.5])
    assert np.allclose(DensityMatrix(from_bloch(r)).bloch(), r)


def test_povm_validation():
    p = binary_povm([0, 0, 1])
    assert p.n_outcomes == 2 and p.dim == 2
    with pytest.raises(InvalidObject):
        Povm(np.array([np.eye(2), np.eye(2)]))


def test_kraus_completeness_checked():
    with pytest.raises(InvalidObject):
        KrausInstrument(np.array([[np.eye(2), np.eye(2)]] * 2))


def test_bundle_dimension_checks():
    prep = canonical_preparations()
    inst = lueders_instrument([binary_povm([1, 0, 0])] * 2)
    chh = (binary_povm([1, 0, 0]), binary_povm([0, 0, 1]))
    StrategyBundle(2, prep, inst, chh)
    with pytest.raises(DimensionMismatch):
        StrategyBundle(3, prep, inst, chh)
    with pytest.raises(DimensionMismatch):
        StrategyBundle(2, prep, inst, chh[:1])
    with pytest.raises(DimensionMismatch):
        StrategyBundle(2, prep, inst, (Povm(np.eye(3)[None]),) * 2)


def test_preparation_messages():
    prep = canonical_preparations()
    assert prep.messages() == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert isinstance(prep.state((1, 0)), DensityMatrix)
    with pytest.raises(InvalidObject):
        Preparation(np.zeros((2, 2, 2, 2)))
