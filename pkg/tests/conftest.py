import numpy as np
import pytest

from jumppot.reference.disk import DiskEigendata, DiskHeatKernel, SkbmDiskOracle


@pytest.fixture(scope="session")
def disk_eigendata():
    return DiskEigendata.compute(60, 60)


@pytest.fixture(scope="session")
def disk_heat(disk_eigendata):
    return DiskHeatKernel(1.0, eigendata=disk_eigendata)


@pytest.fixture(scope="session")
def disk_skbm(disk_heat):
    return SkbmDiskOracle(0.5, heat=disk_heat)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240809)
