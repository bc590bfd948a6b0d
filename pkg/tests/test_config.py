import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_fp.config import CHECK_NAMES, InitialSpec, RunConfig, parse_config, render_config
from nonlocal_fp.errors import ConstraintViolation, MissingRequired, TypeMismatch, UnknownKey
from nonlocal_fp.potential import coupled, cosine1d, zero

MINIMAL = """\
dim = 2
grid = 64 64
beta = 1.0
potential = zero
dt = 1e-3
t_final = 0.1
"""


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.scheme == "imex"
    assert cfg.initial == InitialSpec("uniform")
    assert cfg.conservative_form and cfg.domain_floor == 1e-12
    assert cfg.grid == (64, 64) and cfg.potential == zero()


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\n" + MINIMAL.replace("dt = 1e-3", "dt = 1e-3   # step"))
    assert cfg.dt == 1e-3


def test_coupled_potential_line():
    cfg = parse_config(MINIMAL.replace("potential = zero", "potential = coupled a=1.0 c=0.5"))
    assert cfg.potential == coupled(1.0, 0.5)
    assert len(cfg.potential.params) == 2


def test_negative_beta_reports_line():
    with pytest.raises(ConstraintViolation) as exc:
        parse_config(MINIMAL.replace("beta = 1.0", "beta = -1"))
    assert exc.value.line == 3
    assert str(exc.value).startswith("line 3:")


@pytest.mark.parametrize("text,err,line", [
    (MINIMAL + "colour = red\n", UnknownKey, 7),
    (MINIMAL.replace("dt = 1e-3", "dt = fast"), TypeMismatch, 5),
    (MINIMAL.replace("grid = 64 64", "grid = 64 63"), ConstraintViolation, 2),
    (MINIMAL.replace("dim = 2", "dim = 1").replace("grid = 64 64", "grid = 64"), ConstraintViolation, 1),
    (MINIMAL + "scheme = rk4\n", ConstraintViolation, 7),
    (MINIMAL + "checks = mass nonsense\n", TypeMismatch, 7),
    (MINIMAL + "just some words\n", TypeMismatch, 7),
])
def test_errors_carry_line_numbers(text, err, line):
    with pytest.raises(err) as exc:
        parse_config(text)
    assert exc.value.line == line


def test_missing_required():
    with pytest.raises(MissingRequired):
        parse_config(MINIMAL.replace("t_final = 0.1\n", ""))


configs = st.builds(
    RunConfig,
    dim=st.just(2),
    grid=st.tuples(st.sampled_from([8, 16, 64]), st.sampled_from([8, 32])),
    beta=st.floats(0.1, 10),
    potential=st.sampled_from([zero(), cosine1d(0.3), coupled(1.0, 0.5)]),
    dt=st.floats(1e-6, 1e-2),
    t_final=st.floats(0, 20),
    initial=st.sampled_from([InitialSpec("uniform"), InitialSpec("cosine-perturbed", 0.25),
                             InitialSpec("gibbs-like")]),
    scheme=st.sampled_from(["imex", "picard"]),
    picard_tol=st.floats(1e-14, 1e-6),
    picard_max_iter=st.integers(1, 100),
    conservative_form=st.booleans(),
    domain_floor=st.floats(0, 1e-6),
    supersolution=st.booleans(),
    decoupled_denominator=st.booleans(),
    series_every=st.integers(1, 50),
    snapshot_every=st.integers(0, 50),
    output_dir=st.sampled_from(["out", "runs/a"]),
    checks=st.lists(st.sampled_from(CHECK_NAMES), max_size=3).map(tuple),
)


@settings(max_examples=60, deadline=None)
@given(cfg=configs)
def test_render_parse_roundtrip(cfg):
    assert parse_config(render_config(cfg)) == cfg
