from collections import Counter

import numpy as np
import pytest

from docrepair.bpe import (
    EOW,
    PAD_ID,
    BOS_ID,
    EOS_ID,
    SEP_ID,
    UNK_ID,
    RESERVED_TOKENS,
    MergeTable,
    SubwordTokenizer,
    Vocabulary,
    bpe_encode,
    bpe_train,
)


def _brute_pair_counts(corpus, merges):
    """Independent pair counter: apply merges naively, then count."""
    counts = Counter()
    for sentence in corpus:
        for word in sentence.split():
            syms = list(word[:-1]) + [word[-1] + EOW]
            for left, right in merges:
                out, i = [], 0
                while i < len(syms):
                    if i + 1 < len(syms) and syms[i] == left and syms[i + 1] == right:
                        out.append(left + right)
                        i += 2
                    else:
                        out.append(syms[i])
                        i += 1
                syms = out
            for pair in zip(syms, syms[1:]):
                counts[pair] += 1
    return counts


class TestTraining:
    def test_zero_merges_vocabulary_is_character_inventory(self):
        table, vocab = bpe_train(["ab ba", "cab"], num_merges=0)
        assert table.merges == []
        expected = set(RESERVED_TOKENS) | {"a", "b", "c"} | {"a" + EOW, "b" + EOW}
        assert set(vocab.id_to_token) == expected
        assert tuple(vocab.id_to_token[:5]) == RESERVED_TOKENS

    def test_first_merge_on_repeated_word(self):
        corpus = ["ab ab ab"]
        table, _ = bpe_train(corpus, num_merges=1)
        assert table.merges == [("a", "b" + EOW)]
        assert _brute_pair_counts(corpus, [])[("a", "b" + EOW)] == 3

    def test_merge_frequency_is_non_increasing_at_selection_time(self):
        rng = np.random.default_rng(0)
        words = ["".join(rng.choice(list("abcde"), size=rng.integers(2, 7))) for _ in range(200)]
        corpus = [" ".join(words[i : i + 8]) for i in range(0, 200, 8)]
        table, _ = bpe_train(corpus, num_merges=25)
        freqs = []
        for k, pair in enumerate(table.merges):
            counts = _brute_pair_counts(corpus, table.merges[:k])
            freqs.append(counts[pair])
        assert all(a >= b for a, b in zip(freqs, freqs[1:]))

    def test_greedy_choice_matches_brute_force(self):
        rng = np.random.default_rng(1)
        words = ["".join(rng.choice(list("xyz"), size=rng.integers(2, 5))) for _ in range(60)]
        corpus = [" ".join(words)]
        table, _ = bpe_train(corpus, num_merges=10)
        for k, pair in enumerate(table.merges):
            counts = _brute_pair_counts(corpus, table.merges[:k])
            best = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            assert pair == best

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            bpe_train([], num_merges=5)
        with pytest.raises(ValueError):
            bpe_train(["   ", ""], num_merges=5)

    def test_reserved_string_never_minted_by_merges(self):
        corpus = ["<sep> <sep> <sep> <sep>"] * 50
        table, vocab = bpe_train(corpus, num_merges=50)
        for a, b in table.merges:
            assert a + b not in RESERVED_TOKENS
        assert vocab.token_to_id["<sep>"] == SEP_ID  # only the reserved slot


class TestEncode:
    def test_empty_string(self):
        tok = SubwordTokenizer.train(["a b"], 0)
        assert tok.encode("") == []

    def test_single_merge_collapses_word(self):
        table, vocab = bpe_train(["ab ab ab"], num_merges=1)
        ids = bpe_encode("ab", table, vocab)
        assert len(ids) == 1
        assert vocab.id_to_token[ids[0]] == "ab" + EOW

    def test_unknown_characters_map_to_unk(self):
        tok = SubwordTokenizer.train(["ab ab"], 2)
        ids = tok.encode("aq")
        assert UNK_ID in ids

    def test_never_emits_reserved_ids(self):
        rng = np.random.default_rng(2)
        alphabet = list("abc<>/spe")
        words = ["".join(rng.choice(alphabet, size=rng.integers(1, 8))) for _ in range(300)]
        corpus = [" ".join(words[i : i + 10]) for i in range(0, 300, 10)]
        corpus += ["<sep> <pad> <eos> <bos> <unk>"] * 20
        tok = SubwordTokenizer.train(corpus, 120)
        forbidden = {PAD_ID, BOS_ID, EOS_ID, SEP_ID}
        for line in corpus:
            assert not forbidden.intersection(tok.encode(line))

    def test_prefix_stability(self):
        tok = SubwordTokenizer.train(["abc abd bcd abcd"], 6)
        short = tok.encode("abc bcd")
        long = tok.encode("abc bcd abd abcd")
        assert long[: len(short)] == short


class TestDecode:
    def test_empty_sequence(self):
        tok = SubwordTokenizer.train(["a"], 0)
        assert tok.decode([]) == ""

    def test_control_tokens_only(self):
        tok = SubwordTokenizer.train(["a"], 0)
        assert tok.decode([PAD_ID, BOS_ID, EOS_ID, SEP_ID]) == ""

    def test_out_of_range_id(self):
        tok = SubwordTokenizer.train(["a"], 0)
        with pytest.raises(ValueError):
            tok.decode([len(tok.vocab)])

    def test_unk_renders_literally(self):
        tok = SubwordTokenizer.train(["ab"], 0)
        assert tok.decode([UNK_ID]) == "<unk>"


class TestRoundtrip:
    def test_fixed_examples(self):
        tok = SubwordTokenizer.train(["the cat sat on the mat", "a cat ate the hat"], 20)
        for text in ["the cat", "a hat on the mat", "cat cat cat", "the"]:
            assert tok.decode(tok.encode(text)) == text

    def test_randomized_corpora(self):
        rng = np.random.default_rng(3)
        for trial in range(10):
            alphabet = list("abcdefgh")[: rng.integers(3, 8)]
            words = [
                "".join(rng.choice(alphabet, size=rng.integers(1, 7))) for _ in range(80)
            ]
            corpus = [" ".join(rng.choice(words, size=rng.integers(1, 9))) for _ in range(30)]
            tok = SubwordTokenizer.train(corpus, int(rng.integers(0, 60)))
            for line in corpus:
                assert tok.decode(tok.encode(line)) == line

    def test_deterministic_encoding(self):
        corpus = ["ab ab cd cd abcd"] * 3
        t1 = SubwordTokenizer.train(corpus, 8)
        t2 = SubwordTokenizer.train(corpus, 8)
        assert t1.table.merges == t2.table.merges
        assert t1.vocab.id_to_token == t2.vocab.id_to_token
        assert t1.encode("abcd cd") == t2.encode("abcd cd")


class TestPersistence:
    def test_file_roundtrip(self, tmp_path):
        tok = SubwordTokenizer.train(["hello world", "held well"], 15)
        tok.save(tmp_path / "merges.txt", tmp_path / "vocab.txt")
        loaded = SubwordTokenizer.load(tmp_path / "merges.txt", tmp_path / "vocab.txt")
        assert loaded.table.merges == tok.table.merges
        assert loaded.vocab.id_to_token == tok.vocab.id_to_token
        assert loaded.encode("hello well") == tok.encode("hello well")
        assert loaded.vocab.fingerprint() == tok.vocab.fingerprint()

    def test_merges_header_line(self, tmp_path):
        tok = SubwordTokenizer.train(["ab ab"], 2)
        path = tmp_path / "merges.txt"
        tok.table.save(path)
        assert path.read_text().splitlines()[0] == "docrepair-bpe v1"
        path.write_text("garbage\na b\n")
        with pytest.raises(ValueError):
            MergeTable.load(path)

    def test_vocabulary_requires_reserved_prefix(self):
        with pytest.raises(ValueError):
            Vocabulary(["a", "b", "c"])

    def test_duplicate_merge_pairs_rejected(self):
        with pytest.raises(ValueError):
            MergeTable([("a", "b"), ("a", "b")])
