import random

from wfsmr.bench import builtin_program, gen_cycle, gen_tree
from wfsmr.oracle import game_partition, ground_afp, ground_rule_instances
from wfsmr.program import Fact, parse_program


class TestGroundAfp:
    def test_two_cycle_game(self):
        program = builtin_program("win-not-win")
        true_atoms, undef_atoms = ground_afp(program, gen_cycle(2))
        assert true_atoms == {("move", (1, 2)), ("move", (2, 1))}
        assert undef_atoms == {("win", (1,)), ("win", (2,))}

    def test_smallest_tree(self):
        program = builtin_program("win-not-win")
        true_atoms, undef_atoms = ground_afp(program, gen_tree(1))
        assert undef_atoms == set()
        assert ("win", (1,)) in true_atoms
        assert ("win", (2,)) not in true_atoms

    def test_definite_program_has_no_undefined(self):
        program = parse_program("p(X) :- e(X).\nq(X) :- p(X), e(X).\n")
        true_atoms, undef_atoms = ground_afp(program, [Fact("e", (1,)), Fact("e", (2,))])
        assert undef_atoms == set()
        assert true_atoms == {
            ("e", (1,)),
            ("e", (2,)),
            ("p", (1,)),
            ("p", (2,)),
            ("q", (1,)),
            ("q", (2,)),
        }

    def test_classic_undefined_self_loop(self):
        program = parse_program("p :- not p.\n")
        true_atoms, undef_atoms = ground_afp(program)
        assert true_atoms == set()
        assert undef_atoms == {("p", ())}

    def test_grounding_covers_domain(self):
        rule = parse_program("p(X) :- e(X), not q(X).\n").rules[0]
        instances = ground_rule_instances(rule, [1, 2, 3])
        assert len(instances) == 3
        assert (("p", (2,)), (("e", (2,)),), (("q", (2,)),)) in instances


class TestGamePartition:
    def test_cycle_is_all_drawn(self):
        won, lost, drawn = game_partition([(1, 2), (2, 3), (3, 1)])
        assert won == set() and lost == set()
        assert drawn == {1, 2, 3}

    def test_small_tree(self):
        moves = [(f.args[0], f.args[1]) for f in gen_tree(3)]
        won, lost, drawn = game_partition(moves)
        assert won == {2, 3}
        assert lost == {1, 4, 5, 6, 7}
        assert drawn == set()

    def test_matches_ground_afp_on_random_graphs(self):
        program = builtin_program("win-not-win")
        rng = random.Random(42)
        for _ in range(25):
            nodes = rng.randrange(2, 8)
            edges = {
                (rng.randrange(1, nodes + 1), rng.randrange(1, nodes + 1))
                for _ in range(rng.randrange(1, 12))
            }
            facts = [Fact("move", e) for e in edges]
            true_atoms, undef_atoms = ground_afp(program, facts)
            won, lost, drawn = game_partition(edges)
            assert {a for p, a in true_atoms if p == "win"} == {(x,) for x in won}
            assert undef_atoms == {("win", (x,)) for x in drawn}
            for x in lost:
                assert ("win", (x,)) not in true_atoms
