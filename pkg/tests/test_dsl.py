import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmsec.catalog import get_entry
from harmsec.chart import DEFAULT_FD
from harmsec.dsl import (
    FUNCTIONS, Add, Call, Div, Mul, Neg, Num, Pow, Sub, Var, compile_expression, evaluate, load_config,
    load_structure, parse_config, parse_expression, to_text,
)
from harmsec.errors import AxiomViolation, ConfigError, EvalError, ParseError, UnboundVariable

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

leaves = st.one_of(
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(Num),
    st.integers(0, 50).map(lambda k: Num(float(k))),
    st.sampled_from(["x", "y", "t", "x1", "c"]).map(Var),
)


def _extend(children):
    binary = st.sampled_from([Add, Sub, Mul, Div, Pow])
    return st.one_of(
        st.builds(lambda op, a, b: op(a, b), binary, children, children),
        children.map(Neg),
        st.builds(Call, st.sampled_from(sorted(FUNCTIONS)), children),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=1000, derandomize=True)
@given(asts)
def test_print_parse_round_trip(e):
    assert parse_expression(to_text(e)) == e


class TestParse:
    def test_precedence(self):
        e = parse_expression("2*x1 + sin(x2)^2")
        assert e == Add(Mul(Num(2.0), Var("x1")), Pow(Call("sin", Var("x2")), Num(2.0)))

    def test_unary_minus_below_power(self):
        assert parse_expression("-x^2") == Neg(Pow(Var("x"), Num(2.0)))
        assert parse_expression("2^-1") == Pow(Num(2.0), Neg(Num(1.0)))

    def test_associativity(self):
        assert parse_expression("a - b - c") == Sub(Sub(Var("a"), Var("b")), Var("c"))
        assert parse_expression("a / b * c") == Mul(Div(Var("a"), Var("b")), Var("c"))
        assert parse_expression("a ^ b ^ c") == Pow(Var("a"), Pow(Var("b"), Var("c")))

    def test_trailing_operator_offset(self):
        with pytest.raises(ParseError) as err:
            parse_expression("1 +")
        assert err.value.offset == 3 and "number" in err.value.expected

    @pytest.mark.parametrize("text,offset", [("", 0), ("2 * (x", 6), ("x $ 1", 2), ("1 2", 2), ("sin x", 4)])
    def test_error_offsets(self, text, offset):
        with pytest.raises(ParseError) as err:
            parse_expression(text)
        assert err.value.offset == offset


class TestEvaluate:
    def test_examples(self):
        assert evaluate(parse_expression("exp(t)"), {"t": 0.0}) == 1.0
        assert evaluate(parse_expression("x^2"), {"x": 3.0}) == 9.0
        assert abs(evaluate(parse_expression("sin(x)^2+cos(x)^2"), {"x": 0.7}) - 1.0) < 1e-15

    @pytest.mark.parametrize("text,env", [("1/x1", {"x1": 0.0}), ("log(x)", {"x": -1.0}), ("sqrt(x)", {"x": -2.0}),
                                          ("x^0.5", {"x": -4.0}), ("0^(-1)", {}), ("exp(x)", {"x": 1e4})])
    def test_domain_errors(self, text, env):
        with pytest.raises(EvalError):
            evaluate(parse_expression(text), env)

    def test_unbound(self):
        with pytest.raises(UnboundVariable):
            evaluate(parse_expression("x + y"), {"x": 1.0})
        with pytest.raises(UnboundVariable):
            compile_expression("x + y", ["x"])

    @given(st.floats(-3, 3), st.floats(0.1, 3))
    def test_compiled_matches_interpreter(self, x, y):
        e = parse_expression("(x^2 + c*sin(y)) / (1 + y) - -x^3 + log(y) * tanh(x)")
        fn = compile_expression(e, ["x", "y"], {"c": 0.5})
        ref = evaluate(e, {"x": x, "y": y, "c": 0.5})
        assert fn(x, y) == ref
        assert fn(x, y) == fn(x, y)

    def test_compiled_domain_error(self):
        with pytest.raises(EvalError):
            compile_expression("1/x", ["x"])(0.0)


def _sasakian_data():
    return {
        "name": "sas",
        "coordinates": ["x", "y", "z"],
        "domain": {"x": [-1, 1], "y": [-1, 1], "z": [-1, 1]},
        "metric": [["(1 + y^2) / 4", "0", "-y / 4"], ["0", "1/4", "0"], ["-y / 4", "0", "1/4"]],
        "xi": ["0", "0", "2"],
        "phi": [["0", "1", "0"], ["-1", "0", "0"], ["0", "y", "0"]],
    }


class TestConfig:
    def test_reproduces_builtin(self):
        cfg = load_structure(CONFIGS / "sasakian_R3.toml")
        ref = get_entry("sasakian_R3")
        pts = ref.chart.sample_points(20, 42, DEFAULT_FD)
        worst = 0.0
        for p in pts:
            for a, b in [(cfg.chart.metric(p), ref.chart.metric(p)), (cfg.xi(p), ref.xi(p)),
                         (cfg.eta(p), ref.eta(p)), (cfg.phi(p), ref.phi(p))]:
                worst = max(worst, float(np.max(np.abs(np.asarray(a) - np.asarray(b)))))
        assert worst < 1e-12

    def test_parameters(self):
        cfg = load_config(CONFIGS / "warped_exp.toml")
        assert dict(cfg.parameters)["a"] == 1.5

    def test_non_symmetric_metric(self):
        from harmsec.dsl import build_structure

        d = _sasakian_data()
        d["metric"][0][2] = "-y / 3"
        with pytest.raises(ConfigError):
            build_structure(parse_config(d))

    def test_bad_phi(self):
        from harmsec.dsl import build_structure

        d = _sasakian_data()
        d["phi"][2][1] = "2*y"
        with pytest.raises(AxiomViolation):
            build_structure(parse_config(d))

    @pytest.mark.parametrize("mutate", [
        lambda d: d.pop("metric"),
        lambda d: d.update(colour="red"),
        lambda d: d.update(xi=["0", "2"]),
        lambda d: d["metric"].pop(),
        lambda d: d.update(coordinates=["x", "x", "z"]),
        lambda d: d.update(coordinates=["x", "sin", "z"]),
        lambda d: d["domain"].update(x=[1, -1]),
        lambda d: d["domain"].pop("z"),
        lambda d: d["phi"][0].__setitem__(0, "w"),
        lambda d: d["phi"][0].__setitem__(0, "1 +"),
        lambda d: d["phi"][0].__setitem__(0, True),
        lambda d: d.update(parameters={"x": 1.0}),
        lambda d: d.update(parameters={"a": "one"}),
        lambda d: d.update(fd={"step": 1e-4, "method": "spline"}),
    ])
    def test_malformed(self, mutate):
        d = _sasakian_data()
        mutate(d)
        with pytest.raises(ConfigError):
            parse_config(d)

    def test_unreadable(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.toml")
        bad = tmp_path / "bad.toml"
        bad.write_text("metric = [[", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_unevaluable_metric(self):
        from harmsec.dsl import build_structure

        d = _sasakian_data()
        d["metric"][1][1] = "1 / (4 * (x - x))"
        with pytest.raises(ConfigError):
            build_structure(parse_config(d))

    def test_num_text_is_parseable(self):
        for v in (0.1, 1e-300, 1e20, 123456789.0):
            assert math.isclose(evaluate(parse_expression(to_text(Num(v))), {}), v)
