import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from turnsig.errors import LexiconError
from turnsig.lexicon import (Lexicon, LexiconKind, load_depid_relations, load_lexicon,
                             load_lexicon_dir, match_count, weighted_score)
from turnsig.transcript import Token

WORDS = st.lists(st.sampled_from(["know", "knowing", "now", "all", "never", "or", "happy", "sad"]),
                 max_size=30)


class TestMatchCount:
    def test_prefix(self):
        lex = Lexicon.from_words("k", ["know*"])
        assert match_count(lex, ["know", "knowing", "now"]) == 2

    def test_literals(self):
        lex = Lexicon.from_words("abs", ["all", "never"])
        assert match_count(lex, ["all", "or", "nothing", "never", "never"]) == 3

    def test_empty(self):
        assert match_count(Lexicon.from_words("x", ["a"]), []) == 0

    def test_accepts_tokens(self):
        lex = Lexicon.from_words("abs", ["never"])
        assert match_count(lex, [Token("never"), Token("now")]) == 1

    def test_token_counted_once(self):
        lex = Lexicon.from_words("k", ["know", "know*", "kn*"])
        assert match_count(lex, ["know"]) == 1

    @given(WORDS)
    def test_bounded_by_length(self, words):
        lex = Lexicon.from_words("k", ["know*", "all", "n*"])
        assert 0 <= match_count(lex, words) <= len(words)

    @given(WORDS, st.randoms(use_true_random=False))
    def test_order_invariant(self, words, rnd):
        lex = Lexicon.from_words("k", ["know*", "never"])
        shuffled = list(words)
        rnd.shuffle(shuffled)
        assert match_count(lex, words) == match_count(lex, shuffled)


class TestLongestMatch:
    def test_literal_beats_prefix(self):
        lex = Lexicon.from_words("w", {"know*": 1.0, "know": 3.0}, LexiconKind.WEIGHTED)
        assert lex.lookup("know") == 3.0
        assert lex.lookup("knowing") == 1.0

    def test_longer_prefix_wins(self):
        lex = Lexicon.from_words("w", {"kn*": 1.0, "know*": 2.0}, LexiconKind.WEIGHTED)
        assert lex.lookup("knowledge") == 2.0
        assert lex.lookup("knee") == 1.0
        assert lex.lookup("now") is None
        assert "knee" in lex and "now" not in lex


class TestWeightedScore:
    def test_formula(self):
        lex = Lexicon.from_words("emo", {"happy": 2.0, "sad": -1.0}, LexiconKind.WEIGHTED)
        assert weighted_score(lex, ["happy", "happy", "sad", "go"]) == pytest.approx(0.75, abs=1e-15)

    def test_empty(self):
        lex = Lexicon.from_words("emo", {"happy": 2.0}, LexiconKind.WEIGHTED)
        assert weighted_score(lex, []) == 0.0

    def test_zero_weights(self):
        lex = Lexicon.from_words("emo", {"happy": 0.0, "sad": 0.0}, LexiconKind.WEIGHTED)
        assert weighted_score(lex, ["happy", "sad"]) == 0.0

    @given(WORDS, st.sampled_from([0.5, 2.0, 4.0, -0.25]))
    def test_linear_in_weights(self, words, alpha):
        base = {"happy": 1.5, "sad": -0.75, "know*": 0.125}
        lex = Lexicon.from_words("a", base, LexiconKind.WEIGHTED)
        scaled = Lexicon.from_words("b", {k: alpha * v for k, v in base.items()}, LexiconKind.WEIGHTED)
        # power-of-two scalings keep every partial sum exact
        assert weighted_score(scaled, words) == alpha * weighted_score(lex, words)


class TestLoad:
    def test_two_line_category(self):
        lex = load_lexicon(b"# comment\nneg\tCategory\nnot\nnever\n")
        assert lex.name == "neg" and lex.kind is LexiconKind.CATEGORY and len(lex) == 2

    def test_weighted(self):
        lex = load_lexicon("opt\tWeighted\nhope*\t0.5\nbright\t1.25\n")
        assert lex.lookup("hopeful") == 0.5 and lex.lookup("bright") == 1.25

    @pytest.mark.parametrize("content, fragment", [
        ("x\tCategory\na\na\n", "duplicate"),
        ("x\tWeighted\na\tlots\n", "not a number"),
        ("x\tWeighted\na\n", "lacks a weight"),
        ("x\tWeighted\na\tnan\n", "finite"),
        ("", "empty"),
        ("# only a comment\n", "empty"),
        ("x\tCategory\n", "no entries"),
        ("x\tFancy\na\n", "unknown lexicon kind"),
        ("x\tCategory\nAll\n", "bad pattern"),
        ("x\tCategory\na\t2\n", "cannot carry weights"),
    ])
    def test_errors(self, content, fragment):
        with pytest.raises(LexiconError, match=fragment):
            load_lexicon(content, "t.lex")

    def test_error_locates_line(self):
        with pytest.raises(LexiconError) as info:
            load_lexicon("x\tCategory\na\nb\na\n", "t.lex")
        assert info.value.path == "t.lex:4"


class TestShipped:
    def test_directory(self):
        lex = load_lexicon_dir()
        assert {"func", "absolutist", "empathy", "distress", "optimism", "nonflu"} <= set(lex)
        for name in ("empathy", "distress", "optimism"):
            assert lex[name].kind is LexiconKind.WEIGHTED

    def test_absolutist_has_19_words(self):
        assert len(load_lexicon_dir()["absolutist"]) == 19

    def test_env_override(self, tmp_path, monkeypatch):
        (tmp_path / "neg.lex").write_text("neg\tCategory\nnot\n")
        monkeypatch.setenv("TURNSIG_LEXICONS", str(tmp_path))
        assert set(load_lexicon_dir()) == {"neg"}
        # relations fall back to the bundled list
        assert "root" in load_depid_relations()

    def test_duplicate_names(self, tmp_path):
        (tmp_path / "a.lex").write_text("neg\tCategory\nnot\n")
        (tmp_path / "b.lex").write_text("neg\tCategory\nno\n")
        with pytest.raises(LexiconError, match="defined twice"):
            load_lexicon_dir(tmp_path)

    def test_empty_directory(self, tmp_path):
        with pytest.raises(LexiconError):
            load_lexicon_dir(tmp_path)

    def test_weights_finite(self):
        for lex in load_lexicon_dir().values():
            assert np.all(np.isfinite(list(lex.entries.values())))
