from fractions import Fraction

import pytest
from conftest import bit, distributions
from hypothesis import given, settings
from hypothesis import strategies as st

from secretdist.dist_core import Party, VariableDef, build_distribution, marginal, paper_distribution
from secretdist.errors import NonBinaryAlphabet, OwnershipViolation, UnknownVariable, ZeroProbabilityEvent
from secretdist.protocol import (
    WARN_INITIAL_CMI,
    WARN_POSTSELECT,
    ProtocolStep,
    cnot,
    cnot_step,
    is_perfect_sbit,
    postselect,
    private_send,
    run_paper_protocol,
    run_protocol,
    untrusted_courier_demo,
)

HALF = Fraction(1, 2)


def test_alice_cnot_gives_mid_table(initial_table, mid_table):
    assert cnot_step(initial_table, Party.ALICE, "A", "C") == mid_table


def test_bob_cnot_gives_final_table(mid_table, final_table):
    sent = private_send(mid_table, "C", Party.ALICE, Party.BOB)
    assert cnot_step(sent, Party.BOB, "B", "C") == final_table


def test_cnot_involution(initial_table):
    assert cnot_step(cnot_step(initial_table, "alice", "A", "C"), "alice", "A", "C") == initial_table


def test_cnot_errors(initial_table, mid_table):
    with pytest.raises(OwnershipViolation):
        cnot_step(mid_table, Party.BOB, "B", "C")
    with pytest.raises(NonBinaryAlphabet):
        cnot_step(initial_table, Party.EVE, "E", "E")
    with pytest.raises(UnknownVariable):
        cnot_step(initial_table, Party.ALICE, "A", "Z")


def test_private_send(mid_table):
    sent = private_send(mid_table, "C", "alice", "bob")
    assert sent.same_table(mid_table)
    assert set(sent.owned_by(Party.BOB)) == {"B", "C"}
    assert private_send(sent, "C", "bob", "alice") == mid_table
    with pytest.raises(OwnershipViolation):
        private_send(mid_table, "E", Party.ALICE, Party.BOB)


def test_postselect_examples(final_table):
    kept, p = postselect(final_table, "C", "0")
    assert p == Fraction(1, 3)
    assert dict(kept.support()) == {("0", "0", "e0"): HALF, ("1", "1", "e0"): HALF}
    rejected, q = postselect(final_table, "C", "1")
    assert q == Fraction(2, 3)
    assert dict(marginal(rejected, {"E"}).support()) == {(s,): Fraction(1, 4) for s in ("e01", "e10", "f0", "f1")}
    point = build_distribution([bit("A"), VariableDef("D", ["d"], Party.BOB)], [(("0", "d"), HALF), (("1", "d"), HALF)])
    same, r = postselect(point, "D", "d")
    assert r == 1 and same.same_table(marginal(point, {"A"}))
    with pytest.raises(ZeroProbabilityEvent):
        postselect(build_distribution([bit("A")], [(("0",), 1)]), "A", "1")


def test_sbit_examples(final_table):
    kept, _ = postselect(final_table, "C", "0")
    assert is_perfect_sbit(kept, "A", "B", {"E"}).is_sbit
    v = is_perfect_sbit(final_table, "A", "B", {"E"})
    assert not v.is_sbit and not v.correlation_ok
    ab = marginal(final_table, {"A", "B"})
    assert sum((p for o, p in ab.support() if o[0] != o[1]), Fraction(0)) == Fraction(1, 3)
    copy = build_distribution([bit("A"), bit("B", Party.BOB), bit("E", Party.EVE)],
                              [(("0", "0", "0"), HALF), (("1", "1", "1"), HALF)])
    w = is_perfect_sbit(copy, "A", "B", {"E"})
    assert w.correlation_ok and w.uniformity_ok and not w.eve_independent and not w.is_sbit
    with pytest.raises(NonBinaryAlphabet):
        is_perfect_sbit(final_table, "A", "E", set())


def test_run_paper_protocol():
    trace = run_paper_protocol()
    assert trace.success_probability == Fraction(1, 3)
    assert trace.entries[0].distribution == paper_distribution("after_alice_cnot")
    assert trace.entries[2].distribution == paper_distribution("final")
    assert is_perfect_sbit(trace.final, "A", "B", {"E"}).is_sbit
    names = {c.name: c for c in trace.checks}
    assert names["mid_witness_certified_zero"].passed
    assert names["initial_intrinsic_AC_B_certified_zero"].passed
    assert names["initial_cmi_AC_B_given_E"].value == pytest.approx(1 / 3, abs=1e-9)
    assert WARN_POSTSELECT in trace.warnings and WARN_INITIAL_CMI in trace.warnings
    assert not trace.failed()
    # bits per run
    assert trace.success_probability * 1 == Fraction(1, 3)


def test_trace_legality():
    trace = run_paper_protocol()
    dist = trace.initial
    for entry in trace.entries:
        step = entry.step
        if step.kind == "LocalFunction":
            party = step.params["party"]
            touched = [step.params["target"], *step.params["inputs"]]
            assert all(dist.owner(n) is party for n in touched)
            assert [v.owner for v in entry.distribution.variables] == [v.owner for v in dist.variables]
        elif step.kind == "PrivateSend":
            changed = [a.name for a, b in zip(dist.variables, entry.distribution.variables) if a.owner != b.owner]
            assert changed == [step.params["var"]]
            assert step.describe()["resource"] == "private channel"
        else:
            assert step.describe()["announcement"].endswith("(public)")
            assert "keep" in step.describe()
        dist = entry.distribution


def test_run_protocol_rejects_illegal_steps(initial_table):
    with pytest.raises(OwnershipViolation):
        run_protocol(initial_table, [cnot(Party.BOB, "B", "C")])
    with pytest.raises(ValueError):
        ProtocolStep("Broadcast", {})
    with pytest.raises(ValueError):
        ProtocolStep("PostSelect", {"var": "C"})


@settings(max_examples=40, deadline=None)
@given(distributions(), st.data())
def test_postselect_reconstruction(d, data):
    var = data.draw(st.sampled_from(d.names))
    rest = [n for n in d.names if n != var]
    acc = {}
    for sym in d.variable(var).alphabet:
        try:
            out, p = postselect(d, var, sym)
        except ZeroProbabilityEvent:
            continue
        for o, q in out.support():
            acc[o] = acc.get(o, 0) + p * q
    assert acc == (dict(marginal(d, rest).support()) if rest else {(): 1})


def test_courier_demo():
    demo = untrusted_courier_demo()
    assert demo.key_uniform
    assert demo.eve_cmi == 0.0 and demo.charlie_cmi == 0.0
    assert demo.eve_independent_exact and demo.charlie_independent_exact
    assert demo.collusion_mi == pytest.approx(1.0, abs=1e-12)
    assert demo.distribution.total() == 1
