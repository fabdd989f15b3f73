import random

import pytest

from wfsmr.program import (
    ArityError,
    Atom,
    Fact,
    Literal,
    ParseError,
    Rule,
    SafetyError,
    Variable,
    check_safety,
    facts_to_text,
    parse_facts,
    parse_program,
)

from tests.helpers import random_program

SECTION3_RULE = "p(X,Y) <- a(X,Z), b(Z,Y), not c(X,Z), not d(Z,Y).\n"


class TestParseProgram:
    def test_join_rule_with_two_negations(self):
        program = parse_program(SECTION3_RULE)
        assert len(program.rules) == 1
        rule = program.rules[0]
        assert rule.head == Atom("p", (Variable("X"), Variable("Y")))
        assert len(rule.positive()) == 2
        assert len(rule.negative()) == 2
        assert [a.predicate for a in rule.positive()] == ["a", "b"]
        assert [a.predicate for a in rule.negative()] == ["c", "d"]

    def test_unsafe_rule_names_variable(self):
        with pytest.raises(SafetyError) as err:
            parse_program("p(X,Y) <- a(X,Y), not b(Y,Z).\n")
        assert err.value.variable_names() == ("Z",)
        assert "Z" in str(err.value)

    def test_empty_input(self):
        program = parse_program("")
        assert len(program.rules) == 0
        assert program.pretty() == ""

    def test_both_arrows_and_comments(self):
        text = "% game rule\nwin(X) :- move(X,Y), not win(Y).\nmove(1,2). % an edge\n"
        program = parse_program(text)
        assert len(program.rules) == 2
        assert program.rules[1].is_fact

    def test_facts_in_program_are_collected(self):
        program = parse_program("e(1,2).\ne(2,3).\np(X,Y) :- e(X,Y).\n")
        assert program.facts() == (Fact("e", (1, 2)), Fact("e", (2, 3)))
        assert len(program.proper_rules()) == 1

    def test_arity_mismatch(self):
        with pytest.raises(ArityError) as err:
            parse_program("p(X) :- a(X).\nq(X) :- a(X,X).\n")
        assert err.value.predicate == "a"

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_program("p(X) :- a(X).\np(X :- a(X).\n")
        assert err.value.line == 2
        assert err.value.col > 1

    def test_not_is_reserved(self):
        with pytest.raises(ParseError):
            parse_program("not(X) :- a(X).\n")

    def test_fact_with_variable_rejected(self):
        with pytest.raises(SafetyError) as err:
            parse_program("p(X).\n")
        assert err.value.variable_names() == ("X",)

    def test_function_symbols_rejected(self):
        with pytest.raises(ParseError):
            parse_program("p(X) :- a(f(X)).\n")

    def test_propositional_rules(self):
        program = parse_program("p :- q, not r.\nq.\n")
        assert program.signatures == {"p": 0, "q": 0, "r": 0}
        assert program.rules[0].head.arity == 0

    def test_edb_predicates(self):
        program = parse_program("win(X) :- move(X,Y), not win(Y).\nmove(1,2).\n")
        assert program.edb_predicates == {"move"}

    def test_numeric_constants_canonicalized(self):
        program = parse_program("e(1,02).\n")
        fact = program.facts()[0]
        assert fact.args == (1, "02")  # leading zero keeps the text form


class TestParseFacts:
    def test_positive_goal_input(self):
        facts = parse_facts("a(1,2).\na(1,3).\nb(2,4).\nb(3,5).")
        assert set(facts) == {
            Fact("a", (1, 2)),
            Fact("a", (1, 3)),
            Fact("b", (2, 4)),
            Fact("b", (3, 5)),
        }

    def test_duplicates_removed(self):
        assert parse_facts("a(1,2).\na(1,2).") == (Fact("a", (1, 2)),)

    def test_negative_side_input(self):
        assert set(parse_facts("c(1,2).\nd(2,3).")) == {
            Fact("c", (1, 2)),
            Fact("d", (2, 3)),
        }

    def test_rule_rejected(self):
        with pytest.raises(ParseError):
            parse_facts("p(1) :- q(1).")

    def test_non_ground_rejected(self):
        with pytest.raises(ParseError) as err:
            parse_facts("p(X).")
        assert "not ground" in str(err.value)

    def test_arity_checked(self):
        with pytest.raises(ArityError):
            parse_facts("p(1).\np(1,2).")

    def test_round_trip_through_text(self):
        facts = parse_facts("move(1,2).\nmove(2,1).")
        assert parse_facts(facts_to_text(facts)) == facts


class TestCheckSafety:
    def test_game_rule_is_safe(self):
        rule = parse_program("win(X) :- move(X,Y), not win(Y).\n").rules[0]
        assert check_safety(rule) == ()

    def test_two_unbound_variables(self):
        rule = Rule(
            Atom("q", (Variable("X"), Variable("Y"))),
            (
                Literal(Atom("c", (Variable("X"), Variable("U")))),
                Literal(Atom("d", (Variable("W"), Variable("U"))), negated=True),
                Literal(Atom("e", (Variable("U"), Variable("Y"))), negated=True),
            ),
        )
        assert set(check_safety(rule)) == {"W", "Y"}

    def test_propositional_fact_is_safe(self):
        assert check_safety(Rule(Atom("p"))) == ()

    def test_ground_negative_only_rule_is_safe(self):
        rule = parse_program("p :- not q(1,2).\n").rules[0]
        assert check_safety(rule) == ()


class TestDefiniteSubprogram:
    def test_game_program_has_no_definite_rules(self):
        program = parse_program("win(X) :- move(X,Y), not win(Y).\n")
        assert len(program.definite_subprogram().rules) == 0

    def test_closure_program_keeps_only_positive_rules(self):
        text = (
            "tc(X,Y) :- par(X,Y).\n"
            "tc(X,Y) :- par(X,Z), tc(Z,Y).\n"
            "par(X,Y) :- b(X,Y), not q(X,Y).\n"
            "par(X,Y) :- b(X,Y), b(Y,Z), not q(Y,Z).\n"
            "q(X,Y) :- b(Z,X), b(X,Y), not q(Z,X).\n"
        )
        definite = parse_program(text).definite_subprogram()
        assert [r.head.predicate for r in definite.rules] == ["tc", "tc"]

    def test_horn_program_is_identity(self):
        program = parse_program("p(X) :- e(X).\ne(1).\n")
        assert program.definite_subprogram() == program

    def test_idempotent_and_negation_free(self):
        program = parse_program(SECTION3_RULE + "a(1,2).\n")
        once = program.definite_subprogram()
        assert once.definite_subprogram() == once
        assert all(not lit.negated for r in once.rules for lit in r.body)


class TestRoundTrip:
    @pytest.mark.parametrize(
        "text",
        [
            SECTION3_RULE,
            "win(X) :- move(X,Y), not win(Y).\nmove(1,2).\nmove(2,1).\n",
            "q(X,Y) :- b(Z,X), b(X,Y), not q(Z,X).\n",
            "p :- q, not r.\nq.\n",
        ],
    )
    def test_pretty_print_round_trips(self, text):
        program = parse_program(text)
        assert parse_program(program.pretty()) == program

    def test_random_programs_round_trip(self):
        rng = random.Random(20240817)
        for _ in range(50):
            program = random_program(rng)
            assert parse_program(program.pretty()) == program
