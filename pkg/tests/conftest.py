"""Shared fixtures.

Model assembly and eigendecomposition dominate test runtime, so specs and
labs are cached once per session and shared read-only across test modules.
"""
import pytest

import trotterlab as tl


@pytest.fixture(scope="session")
def lab_cache():
    labs = {}

    def get(tag: str, n: int, **kwargs) -> tl.ErrorLab:
        key = (tag, n, tuple(sorted(kwargs.items())))
        if key not in labs:
            builders = {
                "aklt": tl.build_aklt,
                "mg": tl.build_mg,
                "lr_heisenberg": tl.build_long_range_heisenberg,
            }
            labs[key] = tl.ErrorLab(builders[tag](n, **kwargs))
        return labs[key]

    return get


@pytest.fixture(scope="session")
def aklt4(lab_cache):
    return lab_cache("aklt", 4)


@pytest.fixture(scope="session")
def mg4(lab_cache):
    return lab_cache("mg", 4)
