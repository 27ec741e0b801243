import pytest

from qpmc.pcp import PCPInstance


@pytest.fixture
def e0():
    return PCPInstance((("A", "A"),), bound=1)


@pytest.fixture
def e1():
    return PCPInstance((("A", "AA"), ("AA", "A")), bound=2)


@pytest.fixture
def e2():
    return PCPInstance((("A", "B"),), bound=1)


@pytest.fixture
def pcp_files(tmp_path, e0, e1, e2):
    from qpmc.pcp import dumps_pcp

    out = {}
    for name, inst in (("E0", e0), ("E1", e1), ("E2", e2)):
        path = tmp_path / f"{name}.pcp"
        path.write_text(dumps_pcp(inst), encoding="utf-8")
        out[name] = path
    return out
