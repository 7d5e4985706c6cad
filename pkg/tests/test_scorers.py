"""Text scorers, records, backends, clients, and the corpus runner."""

import json
import random

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_pair
from oracles import random_text, rouge_l_oracle, token_f1_oracle
from qaeval.dataset import Corpus
from qaeval.errors import ProtocolError, ScorerError, TransportError
from qaeval.scorers.backends import (
    HashSemanticBackend,
    HTTPJudgeClient,
    HTTPSemanticBackend,
    ScriptedJudgeClient,
    ScriptedSemanticBackend,
    content_key,
    with_retries,
)
from qaeval.scorers.judge import JUDGE_USER_TEMPLATE, llm_judge, parse_verdict
from qaeval.scorers.nli import (
    format_nli_input,
    nli_entailment,
    validate_probs,
)
from qaeval.scorers.records import (
    EndpointConfig,
    ScoreRecord,
    ScorerDescriptor,
    binarize,
    load_score_records,
    save_score_records,
)
from qaeval.scorers.runner import (
    BackendRegistry,
    ScoreCache,
    pair_content_key,
    score_corpus,
)
from qaeval.scorers.text import lexical_match, normalize, rouge_l, token_f1, tokenize

VERBOSE_NATIONALITY_ANSWER = (
    "Scott Derrickson is an American Director, while Ed Wood was a American "
    "filmmaker. Both are of the same nationality."
)


class TestNormalize:
    def test_casefold_collapse_trim(self):
        assert normalize("  The   SKY\tis\nBlue  ") == "the sky is blue"

    def test_unicode_casefold(self):
        # casefold, not lower: the sharp s expands
        assert normalize("STRASSE") == normalize("straße")


class TestLexicalMatch:
    def test_identity(self):
        assert lexical_match("Paris", "Paris") == 1

    def test_case_folded_substring(self):
        assert lexical_match("The capital is paris, obviously.", "Paris") == 1

    def test_short_reference_absent_from_verbose_answer(self):
        assert lexical_match(VERBOSE_NATIONALITY_ANSWER, "yes") == 0

    def test_whitespace_runs_collapse_before_matching(self):
        assert lexical_match("the answer is  new   york city", "New York") == 1

    def test_direction_is_reference_in_candidate(self):
        assert lexical_match("blue", "the sky is blue") == 0

    def test_returns_int(self):
        assert isinstance(lexical_match("a b", "a"), int)

    @pytest.mark.parametrize("candidate,reference", [("", "x"), ("x", ""), ("  ", "x"), ("x", " \t ")])
    def test_blank_inputs_rejected(self, candidate, reference):
        with pytest.raises(ValueError, match="nonempty"):
            lexical_match(candidate, reference)


class TestTokenize:
    def test_punctuation_splits(self):
        assert tokenize("The cat, sat; on-the mat!") == ["the", "cat", "sat", "on", "the", "mat"]

    def test_underscore_splits(self):
        assert tokenize("foo_bar") == ["foo", "bar"]

    def test_digits_kept(self):
        assert tokenize("route 66") == ["route", "66"]

    def test_empty(self):
        assert tokenize("...!?") == []


class TestTokenF1:
    def test_identity(self):
        assert token_f1("the cat sat", "the cat sat") == 1.0

    def test_disjoint(self):
        assert token_f1("alpha beta", "gamma delta") == 0.0

    def test_partial_overlap(self):
        # P = 2/3, R = 1 -> F1 = 0.8
        assert token_f1("the cat sat", "the cat") == pytest.approx(0.8, abs=1e-4)

    def test_multiset_counts_repeats(self):
        # overlap min(2,1) + min(1,1) = 2; P = 2/3, R = 1
        assert token_f1("the the cat", "the cat") == pytest.approx(0.8, abs=1e-4)

    def test_punctuation_only_candidate_scores_zero(self):
        assert token_f1("?!", "answer") == 0.0

    def test_matches_oracle_randomized(self):
        rng = random.Random(41)
        for _ in range(400):
            cand, ref = random_text(rng), random_text(rng)
            oracle = token_f1_oracle(tokenize(cand), tokenize(ref))
            assert abs(token_f1(cand, ref) - oracle) <= 1e-10


class TestRougeL:
    def test_identity(self):
        assert rouge_l("the cat sat", "the cat sat") == 1.0

    def test_disjoint(self):
        assert rouge_l("alpha beta", "gamma delta") == 0.0

    def test_subsequence_fixture(self):
        # LCS = 4 over lengths 6 and 5 -> 2 * (4/6) * (4/5) / (4/6 + 4/5)
        got = rouge_l("the cat sat on the mat", "the cat on a mat")
        assert got == pytest.approx(16 / 22, abs=1e-4)

    def test_order_matters(self):
        assert rouge_l("b a", "a b") == pytest.approx(2 * 0.5 * 0.5 / 1.0)

    def test_matches_oracle_randomized(self):
        rng = random.Random(42)
        for _ in range(400):
            cand, ref = random_text(rng), random_text(rng)
            oracle = rouge_l_oracle(tokenize(cand), tokenize(ref))
            assert abs(rouge_l(cand, ref) - oracle) <= 1e-10

    @given(st.text(alphabet="ab ", min_size=1, max_size=12).filter(str.strip))
    def test_self_similarity_is_one_or_zero(self, text):
        score = rouge_l(text, text)
        assert score in (0.0, 1.0)
        if tokenize(text):
            assert score == 1.0


class TestBinarize:
    def test_strictly_above(self):
        assert binarize(0.51, 0.5) == 1

    def test_exact_tie_is_zero(self):
        assert binarize(0.5, 0.5) == 0

    def test_below(self):
        assert binarize(0.49, 0.5) == 0

    def test_endpoints(self):
        assert binarize(0.0, 0.5) == 0
        assert binarize(1.0, 0.5) == 1

    @pytest.mark.parametrize("threshold", [0.0, 1.0, -0.1, 1.5])
    def test_threshold_outside_open_interval_rejected(self, threshold):
        with pytest.raises(ValueError, match="threshold"):
            binarize(0.5, threshold)

    @pytest.mark.parametrize("score", [-0.01, 1.01])
    def test_score_out_of_range_rejected(self, score):
        with pytest.raises(ValueError, match="out of"):
            binarize(score, 0.5)

    @given(st.floats(min_value=0, max_value=1), st.floats(min_value=0.01, max_value=0.99))
    def test_agrees_with_comparison(self, score, threshold):
        assert binarize(score, threshold) == (1 if score > threshold else 0)


class TestScoreRecord:
    def test_success_roundtrip(self):
        record = ScoreRecord("p1", "lex", raw_score=0.75, verdict=1, latency=0.01)
        back = ScoreRecord.from_dict(record.to_dict())
        assert back == record
        assert not record.failed

    def test_failure_roundtrip(self):
        record = ScoreRecord("p1", "judge", failure_note="TransportError: boom")
        assert record.failed
        assert ScoreRecord.from_dict(record.to_dict()) == record

    def test_success_requires_score_and_verdict(self):
        with pytest.raises(ValueError, match="needs score and verdict"):
            ScoreRecord("p1", "lex")
        with pytest.raises(ValueError, match="needs score and verdict"):
            ScoreRecord("p1", "lex", raw_score=0.5)

    def test_score_range_checked(self):
        with pytest.raises(ValueError, match="out of"):
            ScoreRecord("p1", "lex", raw_score=1.5, verdict=1)

    def test_verdict_domain_checked(self):
        with pytest.raises(ValueError, match="verdict"):
            ScoreRecord("p1", "lex", raw_score=0.5, verdict=2)

    def test_save_load_roundtrip(self, tmp_path):
        records = [
            ScoreRecord("p1", "lex", raw_score=1.0, verdict=1),
            ScoreRecord("p2", "lex", failure_note="ScorerError: nope"),
        ]
        path = tmp_path / "records.jsonl"
        save_score_records(records, path)
        assert load_score_records(path) == records


class TestDescriptors:
    def test_endpoint_roundtrip(self):
        config = EndpointConfig("https://api.example/v1", credential_env="API_KEY", model="m")
        assert EndpointConfig.from_dict(config.to_dict()) == config

    def test_endpoint_defaults(self):
        config = EndpointConfig.from_dict({"base_url": "https://x"})
        assert (config.timeout, config.max_retries, config.backoff_base) == (30.0, 3, 0.5)

    def test_descriptor_roundtrip_with_endpoint(self):
        descriptor = ScorerDescriptor(
            name="judge",
            kind="llm_judge",
            active_param_count=8_000_000_000,
            endpoint_config=EndpointConfig("https://x", model="m"),
        )
        assert ScorerDescriptor.from_dict(descriptor.to_dict()) == descriptor

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown scorer kind"):
            ScorerDescriptor(name="x", kind="bleu")

    def test_negative_params_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            ScorerDescriptor(name="x", kind="lexical", active_param_count=-1)

    @pytest.mark.parametrize("kind", ["llm_judge", "external"])
    def test_remote_kinds_need_endpoint_or_backend(self, kind):
        with pytest.raises(ValueError, match="needs an endpoint or backend"):
            ScorerDescriptor(name="x", kind=kind)
        ScorerDescriptor(name="x", kind=kind, options={"backend": {"type": "hash"}})

    def test_local_kinds_need_nothing(self):
        ScorerDescriptor(name="lex", kind="lexical")


class TestNliInput:
    def test_template_rendering(self):
        premise, hypothesis = format_nli_input("Who?", "Bob", "Robert")
        assert premise == "question: Who? answer: Bob"
        assert hypothesis == "question: Who? ground truth: Robert"

    def test_newlines_preserved(self):
        premise, _ = format_nli_input("a\nb", "c\nd", "e")
        assert premise == "question: a\nb answer: c\nd"

    @pytest.mark.parametrize("field", ["question", "answer", "reference"])
    def test_blank_field_rejected(self, field):
        kwargs = {"question": "q", "answer": "a", "reference": "r", field: "  "}
        with pytest.raises(ValueError, match=field):
            format_nli_input(**kwargs)

    def test_entailment_component_selected(self):
        backend = ScriptedSemanticBackend(default=(0.7, 0.2, 0.1))
        assert nli_entailment("q", "a", "r", backend) == 0.7

    def test_backend_sees_templated_input(self):
        backend = ScriptedSemanticBackend()
        backend.script("question: q answer: a", "question: q ground truth: r", (0.9, 0.05, 0.05))
        assert nli_entailment("q", "a", "r", backend) == 0.9

    def test_template_override(self):
        backend = ScriptedSemanticBackend()
        backend.script("a", "r", (0.8, 0.1, 0.1))
        got = nli_entailment(
            "q", "a", "r", backend,
            premise_template="{answer}", hypothesis_template="{reference}",
        )
        assert got == 0.8

    def test_long_input_warns(self):
        backend = ScriptedSemanticBackend(default=(1.0, 0.0, 0.0))
        with pytest.warns(UserWarning, match="may truncate"):
            nli_entailment("q", "x" * 5000, "r", backend)

    def test_within_budget_no_warning(self, recwarn):
        backend = ScriptedSemanticBackend(default=(1.0, 0.0, 0.0))
        nli_entailment("q", "a", "r", backend)
        assert not recwarn.list


class TestValidateProbs:
    def test_valid_vector(self):
        assert validate_probs((0.7, 0.2, 0.1)) == 0.7

    def test_tolerance_accepts_small_gap(self):
        assert validate_probs((0.7, 0.2, 0.1005)) == 0.7

    def test_sum_violation(self):
        with pytest.raises(ProtocolError, match="sum"):
            validate_probs((0.5, 0.6, 0.2))

    def test_component_out_of_range(self):
        with pytest.raises(ProtocolError, match="out of"):
            validate_probs((1.2, -0.1, -0.1))

    def test_wrong_arity(self):
        with pytest.raises(ProtocolError, match="3 probabilities"):
            validate_probs((0.5, 0.5))


class TestJudge:
    def test_parse_accepts_binary(self):
        assert parse_verdict("1") == 1
        assert parse_verdict(" 0\n") == 0

    @pytest.mark.parametrize("reply", ["The answer is correct", "yes", "01", "", "2"])
    def test_parse_rejects_everything_else(self, reply):
        with pytest.raises(ProtocolError, match="single token"):
            parse_verdict(reply)

    def test_scripted_passthrough(self):
        client = ScriptedJudgeClient(default="1")
        assert llm_judge("q", "a", "r", client) == 1

    def test_prompt_rendering_reaches_client(self):
        user = JUDGE_USER_TEMPLATE.format(question="q", reference="r", answer="a")
        assert user == "question: q\nreference answer: r\ncandidate answer: a"
        client = ScriptedJudgeClient()
        client.script(user, ["0"])
        assert llm_judge("q", "a", "r", client) == 0

    def test_nonbinary_completion_is_protocol_error(self):
        client = ScriptedJudgeClient(default="The answer is correct")
        with pytest.raises(ProtocolError):
            llm_judge("q", "a", "r", client)


class TestRetries:
    def test_success_needs_no_sleep(self):
        delays = []
        assert with_retries(lambda: 7, max_retries=3, sleep=delays.append) == 7
        assert delays == []

    def test_fail_twice_then_succeed(self):
        attempts = {"n": 0}

        def flaky():
            attempts["n"] += 1
            if attempts["n"] <= 2:
                raise TransportError("down")
            return "ok"

        delays = []
        assert with_retries(flaky, max_retries=3, backoff_base=0.5, sleep=delays.append) == "ok"
        assert attempts["n"] == 3
        assert delays == [0.5, 1.0]

    def test_exhaustion_propagates(self):
        delays = []

        def always_down():
            raise TransportError("down")

        with pytest.raises(TransportError):
            with_retries(always_down, max_retries=2, backoff_base=1.0, sleep=delays.append)
        assert delays == [1.0, 2.0]

    def test_protocol_error_never_retried(self):
        calls = {"n": 0}

        def broken():
            calls["n"] += 1
            raise ProtocolError("bad reply")

        with pytest.raises(ProtocolError):
            with_retries(broken, max_retries=5, sleep=lambda _: None)
        assert calls["n"] == 1

    def test_zero_retries_means_single_attempt(self):
        def always_down():
            raise TransportError("down")

        with pytest.raises(TransportError):
            with_retries(always_down, max_retries=0, sleep=lambda _: pytest.fail("slept"))


class TestScriptedSemanticBackend:
    def test_entries_and_default(self):
        backend = ScriptedSemanticBackend(default=(0.2, 0.3, 0.5))
        backend.script("p", "h", (0.9, 0.05, 0.05))
        assert backend.entailment_probs("p", "h") == (0.9, 0.05, 0.05)
        assert backend.entailment_probs("other", "h") == (0.2, 0.3, 0.5)
        assert backend.calls == 2

    def test_missing_entry_without_default(self):
        backend = ScriptedSemanticBackend()
        with pytest.raises(ProtocolError, match="no entry"):
            backend.entailment_probs("p", "h")

    def test_fail_keys_raise_transport(self):
        backend = ScriptedSemanticBackend(default=(1.0, 0.0, 0.0))
        backend.fail_on("p", "h")
        with pytest.raises(TransportError):
            backend.entailment_probs("p", "h")

    def test_crash_after_budget(self):
        backend = ScriptedSemanticBackend(default=(1.0, 0.0, 0.0), crash_after=2)
        backend.entailment_probs("a", "b")
        backend.entailment_probs("c", "d")
        with pytest.raises(RuntimeError, match="budget exhausted"):
            backend.entailment_probs("e", "f")

    def test_save_load_roundtrip(self, tmp_path):
        backend = ScriptedSemanticBackend(default=(0.1, 0.2, 0.7))
        backend.script("p", "h", (0.8, 0.1, 0.1))
        backend.fail_on("x", "y")
        path = tmp_path / "script.json"
        backend.save(path)
        loaded = ScriptedSemanticBackend.load(path)
        assert loaded.entries == backend.entries
        assert loaded.default == backend.default
        assert loaded.fail_keys == backend.fail_keys


class TestHashBackend:
    def test_deterministic(self):
        a = HashSemanticBackend(seed=3).entailment_probs("p", "h")
        b = HashSemanticBackend(seed=3).entailment_probs("p", "h")
        assert a == b

    def test_seed_changes_output(self):
        assert HashSemanticBackend(0).entailment_probs("p", "h") != HashSemanticBackend(
            1
        ).entailment_probs("p", "h")

    def test_sums_to_exactly_one(self):
        for i in range(50):
            probs = HashSemanticBackend(0).entailment_probs(f"p{i}", "h")
            assert sum(probs) == 1.0
            assert all(0.0 <= p <= 1.0 for p in probs)
            validate_probs(probs)


def semantic_endpoint(transport, **kwargs) -> HTTPSemanticBackend:
    config = EndpointConfig("https://nli.test/score", **kwargs)
    return HTTPSemanticBackend(config, transport=transport)


class TestHTTPSemanticBackend:
    def test_request_and_reply(self):
        seen = {}

        def handler(request):
            seen["body"] = json.loads(request.content)
            return httpx.Response(200, json={"entailment": 0.7, "neutral": 0.2, "contradiction": 0.1})

        backend = semantic_endpoint(httpx.MockTransport(handler))
        assert backend.entailment_probs("p", "h") == (0.7, 0.2, 0.1)
        assert seen["body"] == {"premise": "p", "hypothesis": "h"}

    def test_auth_header_from_env(self, monkeypatch):
        monkeypatch.setenv("NLI_TOKEN", "sekrit")
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={"entailment": 1.0, "neutral": 0.0, "contradiction": 0.0})

        backend = semantic_endpoint(httpx.MockTransport(handler), credential_env="NLI_TOKEN")
        backend.entailment_probs("p", "h")
        assert seen["auth"] == "Bearer sekrit"

    def test_unset_credential_env_sends_no_header(self, monkeypatch):
        monkeypatch.delenv("NLI_TOKEN", raising=False)
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={"entailment": 1.0, "neutral": 0.0, "contradiction": 0.0})

        backend = semantic_endpoint(httpx.MockTransport(handler), credential_env="NLI_TOKEN")
        backend.entailment_probs("p", "h")
        assert seen["auth"] is None

    def test_5xx_is_transport_error(self):
        backend = semantic_endpoint(httpx.MockTransport(lambda r: httpx.Response(503)))
        with pytest.raises(TransportError, match="503"):
            backend.entailment_probs("p", "h")

    def test_4xx_is_protocol_error(self):
        backend = semantic_endpoint(httpx.MockTransport(lambda r: httpx.Response(404)))
        with pytest.raises(ProtocolError, match="404"):
            backend.entailment_probs("p", "h")

    def test_non_json_body_is_protocol_error(self):
        backend = semantic_endpoint(
            httpx.MockTransport(lambda r: httpx.Response(200, text="<html>oops</html>"))
        )
        with pytest.raises(ProtocolError, match="non-JSON"):
            backend.entailment_probs("p", "h")

    def test_missing_field_is_protocol_error(self):
        backend = semantic_endpoint(
            httpx.MockTransport(lambda r: httpx.Response(200, json={"entailment": 0.5}))
        )
        with pytest.raises(ProtocolError, match="missing field"):
            backend.entailment_probs("p", "h")

    def test_network_failure_is_transport_error(self):
        def handler(request):
            raise httpx.ConnectError("refused")

        backend = semantic_endpoint(httpx.MockTransport(handler))
        with pytest.raises(TransportError, match="unreachable"):
            backend.entailment_probs("p", "h")

    def test_batch_roundtrip(self):
        def handler(request):
            body = json.loads(request.content)
            n = len(body["premise"])
            return httpx.Response(
                200,
                json={
                    "entailment": [0.8] * n,
                    "neutral": [0.1] * n,
                    "contradiction": [0.1] * n,
                },
            )

        backend = semantic_endpoint(httpx.MockTransport(handler))
        got = backend.entailment_probs_batch(["p1", "p2"], ["h1", "h2"])
        assert got == [(0.8, 0.1, 0.1), (0.8, 0.1, 0.1)]

    def test_batch_length_mismatch_rejected(self):
        backend = semantic_endpoint(httpx.MockTransport(lambda r: httpx.Response(200, json={})))
        with pytest.raises(ValueError, match="equal length"):
            backend.entailment_probs_batch(["p"], ["h1", "h2"])

    def test_batch_reply_shape_checked(self):
        def handler(request):
            return httpx.Response(
                200, json={"entailment": [0.8], "neutral": [0.1], "contradiction": [0.1, 0.2]}
            )

        backend = semantic_endpoint(httpx.MockTransport(handler))
        with pytest.raises(ProtocolError, match="match request length"):
            backend.entailment_probs_batch(["p1", "p2"], ["h1", "h2"])


class TestHTTPJudgeClient:
    def make_client(self, handler, **kwargs):
        config = EndpointConfig("https://judge.test/v1/chat", model="judge-model", **kwargs)
        return HTTPJudgeClient(config, transport=httpx.MockTransport(handler))

    def test_request_shape(self):
        seen = {}

        def handler(request):
            seen["body"] = json.loads(request.content)
            return httpx.Response(
                200, json={"choices": [{"message": {"role": "assistant", "content": "1"}}]}
            )

        client = self.make_client(handler)
        assert client.complete("sys", "user text") == "1"
        body = seen["body"]
        assert body["model"] == "judge-model"
        assert body["messages"] == [
            {"role": "system", "content": "sys"},
            {"role": "user", "content": "user text"},
        ]
        assert body["temperature"] == 0
        assert body["max_tokens"] == 1
        assert body["guided_choice"] == ["0", "1"]

    def test_rate_limit_is_transport_error(self):
        client = self.make_client(lambda r: httpx.Response(429))
        with pytest.raises(TransportError, match="429"):
            client.complete("s", "u")

    def test_5xx_is_transport_error(self):
        client = self.make_client(lambda r: httpx.Response(500))
        with pytest.raises(TransportError):
            client.complete("s", "u")

    def test_4xx_is_protocol_error(self):
        client = self.make_client(lambda r: httpx.Response(401))
        with pytest.raises(ProtocolError, match="401"):
            client.complete("s", "u")

    def test_malformed_reply_is_protocol_error(self):
        client = self.make_client(lambda r: httpx.Response(200, json={"choices": []}))
        with pytest.raises(ProtocolError, match="chat-completion"):
            client.complete("s", "u")


def two_pair_corpus() -> Corpus:
    hit = make_pair(question_id="q001", candidate="the sky is blue")
    miss = make_pair(question_id="q002", candidate="no idea at all")
    return Corpus("tiny", [hit, miss])


class TestScoreCorpusLocal:
    def test_lexical_matches_direct_computation(self):
        corpus = two_pair_corpus()
        records = score_corpus(corpus, ScorerDescriptor(name="lex", kind="lexical"))
        by_id = {r.pair_id: r for r in records}
        for pair in corpus:
            expected = float(lexical_match(pair.candidate_answer, pair.reference_answer))
            assert by_id[pair.pair_id].raw_score == expected

    @pytest.mark.parametrize("kind,fn", [("token_f1", token_f1), ("rouge_l", rouge_l)])
    def test_overlap_kinds_match_direct_computation(self, kind, fn):
        corpus = two_pair_corpus()
        records = score_corpus(corpus, ScorerDescriptor(name=kind, kind=kind))
        by_id = {r.pair_id: r for r in records}
        for pair in corpus:
            assert by_id[pair.pair_id].raw_score == fn(pair.candidate_answer, pair.reference_answer)

    def test_local_records_have_no_latency(self):
        records = score_corpus(two_pair_corpus(), ScorerDescriptor(name="lex", kind="lexical"))
        assert all(r.latency is None for r in records)

    def test_records_sorted_by_pair_id(self):
        pairs = [make_pair(question_id=f"q{i:03d}") for i in (3, 1, 2)]
        corpus = Corpus("tiny", pairs)
        records = score_corpus(corpus, ScorerDescriptor(name="lex", kind="lexical"))
        assert [r.pair_id for r in records] == sorted(p.pair_id for p in pairs)

    def test_threshold_applied(self):
        pair = make_pair(candidate="sky blue")  # token_f1 = 2*(1/2)*1/(3/2) = 2/3
        corpus = Corpus("tiny", [pair])
        descriptor = ScorerDescriptor(name="tf1", kind="token_f1")
        low = score_corpus(corpus, descriptor, threshold=0.5)[0]
        high = score_corpus(corpus, descriptor, threshold=0.7)[0]
        assert (low.verdict, high.verdict) == (1, 0)


class TestScoreCorpusRemote:
    def nli_descriptor(self, **options) -> ScorerDescriptor:
        return ScorerDescriptor(name="nli", kind="nli", options=options)

    def test_nli_with_registered_backend(self):
        corpus = two_pair_corpus()
        backend = ScriptedSemanticBackend(default=(0.9, 0.05, 0.05))
        registry = BackendRegistry()
        registry.register_semantic("nli", backend)
        records = score_corpus(corpus, self.nli_descriptor(), registry)
        assert all(r.raw_score == 0.9 and r.verdict == 1 for r in records)
        assert all(r.latency is not None for r in records)
        assert backend.calls == len(corpus)

    def test_external_kind_is_question_blind(self):
        pair = make_pair()
        backend = ScriptedSemanticBackend()
        # Keyed on (candidate, reference) with no question or template text.
        backend.script(pair.candidate_answer, pair.reference_answer, (0.6, 0.3, 0.1))
        registry = BackendRegistry()
        registry.register_semantic("sim", backend)
        descriptor = ScorerDescriptor(
            name="sim", kind="external", options={"backend": {"type": "hash"}}
        )
        records = score_corpus(Corpus("tiny", [pair]), descriptor, registry)
        assert records[0].raw_score == 0.6

    def test_judge_scoring_and_raw_score(self):
        corpus = two_pair_corpus()
        client = ScriptedJudgeClient(default="1")
        registry = BackendRegistry()
        registry.register_judge("judge", client)
        descriptor = ScorerDescriptor(
            name="judge", kind="llm_judge", options={"backend": {"type": "unused"}}
        )
        records = score_corpus(corpus, descriptor, registry)
        assert all(r.raw_score == 1.0 and r.verdict == 1 for r in records)

    def test_judge_retries_then_succeeds(self):
        pair = make_pair()
        user = JUDGE_USER_TEMPLATE.format(
            question=pair.question,
            reference=pair.reference_answer,
            answer=pair.candidate_answer,
        )
        client = ScriptedJudgeClient()
        client.script(user, ["transport-error", "transport-error", "0"])
        registry = BackendRegistry()
        registry.register_judge("judge", client)
        descriptor = ScorerDescriptor(
            name="judge",
            kind="llm_judge",
            options={"backend": {"type": "unused"}, "max_retries": 3, "backoff_base": 0.25},
        )
        delays = []
        records = score_corpus(Corpus("tiny", [pair]), descriptor, registry, sleep=delays.append)
        assert records[0].verdict == 0
        assert records[0].raw_score == 0.0
        assert client.calls == 3
        assert delays == [0.25, 0.5]

    def test_exhausted_retries_become_failure_record(self):
        pair = make_pair()
        backend = ScriptedSemanticBackend(default=(1.0, 0.0, 0.0))
        backend.fail_on(
            f"question: {pair.question} answer: {pair.candidate_answer}",
            f"question: {pair.question} ground truth: {pair.reference_answer}",
        )
        registry = BackendRegistry()
        registry.register_semantic("nli", backend)
        delays = []
        records = score_corpus(
            Corpus("tiny", [pair]),
            self.nli_descriptor(max_retries=2, backoff_base=1.0),
            registry,
            sleep=delays.append,
        )
        assert records[0].failed
        assert "TransportError" in records[0].failure_note
        assert delays == [1.0, 2.0]
        assert backend.calls == 3

    def test_protocol_error_fails_without_retry(self):
        pair = make_pair()
        client = ScriptedJudgeClient(default="maybe")
        registry = BackendRegistry()
        registry.register_judge("judge", client)
        descriptor = ScorerDescriptor(
            name="judge", kind="llm_judge", options={"backend": {"type": "unused"}}
        )
        records = score_corpus(Corpus("tiny", [pair]), descriptor, registry)
        assert records[0].failed
        assert "ProtocolError" in records[0].failure_note
        assert client.calls == 1

    def test_failures_leave_other_pairs_scored(self):
        corpus = two_pair_corpus()
        hit, miss = sorted(corpus, key=lambda p: p.pair_id)
        backend = ScriptedSemanticBackend(default=(0.8, 0.1, 0.1))
        backend.fail_on(
            f"question: {miss.question} answer: {miss.candidate_answer}",
            f"question: {miss.question} ground truth: {miss.reference_answer}",
        )
        registry = BackendRegistry()
        registry.register_semantic("nli", backend)
        records = score_corpus(
            corpus, self.nli_descriptor(max_retries=0), registry, sleep=lambda _: None
        )
        by_id = {r.pair_id: r for r in records}
        assert by_id[hit.pair_id].raw_score == 0.8
        assert by_id[miss.pair_id].failed
        assert len(records) == len(corpus)

    def test_crash_propagates(self):
        corpus = two_pair_corpus()
        backend = ScriptedSemanticBackend(default=(1.0, 0.0, 0.0), crash_after=1)
        registry = BackendRegistry()
        registry.register_semantic("nli", backend)
        with pytest.raises(RuntimeError, match="budget exhausted"):
            score_corpus(corpus, self.nli_descriptor(), registry)

    def test_parallel_equals_serial(self):
        pairs = [make_pair(question_id=f"q{i:03d}", candidate=f"answer {i}") for i in range(8)]
        corpus = Corpus("tiny", pairs)
        registry = BackendRegistry()
        registry.register_semantic("nli", HashSemanticBackend(seed=5))
        descriptor = self.nli_descriptor()
        serial = score_corpus(corpus, descriptor, registry, parallelism=1)
        parallel = score_corpus(corpus, descriptor, registry, parallelism=4)
        strip = lambda rs: [(r.pair_id, r.raw_score, r.verdict) for r in rs]
        assert strip(serial) == strip(parallel)

    def test_unregistered_semantic_backend_rejected(self):
        with pytest.raises(ScorerError, match="no registered backend"):
            score_corpus(two_pair_corpus(), self.nli_descriptor(), BackendRegistry())

    def test_unknown_backend_type_rejected(self):
        descriptor = ScorerDescriptor(
            name="x", kind="external", options={"backend": {"type": "quantum"}}
        )
        with pytest.raises(ScorerError, match="unknown backend type"):
            score_corpus(two_pair_corpus(), descriptor, BackendRegistry())

    def test_scripted_backend_built_from_options(self, tmp_path):
        pair = make_pair()
        backend = ScriptedSemanticBackend(default=(0.55, 0.25, 0.2))
        path = tmp_path / "script.json"
        backend.save(path)
        descriptor = ScorerDescriptor(
            name="nli", kind="nli", options={"backend": {"type": "scripted", "path": str(path)}}
        )
        records = score_corpus(Corpus("tiny", [pair]), descriptor, BackendRegistry())
        assert records[0].raw_score == 0.55


class TestScoreCache:
    def test_put_get_roundtrip(self, tmp_path):
        cache = ScoreCache(tmp_path)
        cache.put("nli", "k1", 0.9, 1)
        assert cache.get("nli", "k1") == (0.9, 1)
        assert cache.get("nli", "missing") is None

    def test_put_is_idempotent_on_disk(self, tmp_path):
        cache = ScoreCache(tmp_path)
        cache.put("nli", "k1", 0.9, 1)
        cache.put("nli", "k1", 0.4, 0)
        fresh = ScoreCache(tmp_path)
        assert fresh.get("nli", "k1") == (0.9, 1)
        lines = [l for l in (tmp_path / "nli.jsonl").read_text().splitlines() if l]
        assert len(lines) == 1

    def test_scorer_names_slugged_for_filenames(self, tmp_path):
        cache = ScoreCache(tmp_path)
        cache.put("nli+lex", "k", 1.0, 1)
        assert (tmp_path / "nli_lex.jsonl").exists()

    def test_cache_short_circuits_backend(self, tmp_path):
        corpus = two_pair_corpus()
        backend = ScriptedSemanticBackend(default=(0.9, 0.05, 0.05))
        registry = BackendRegistry()
        registry.register_semantic("nli", backend)
        descriptor = ScorerDescriptor(name="nli", kind="nli")
        cache = ScoreCache(tmp_path)

        first = score_corpus(corpus, descriptor, registry, cache=cache)
        assert backend.calls == 2
        second = score_corpus(corpus, descriptor, registry, cache=cache)
        assert backend.calls == 2
        strip = lambda rs: [(r.pair_id, r.raw_score, r.verdict) for r in rs]
        assert strip(first) == strip(second)

    def test_cache_survives_process_restart(self, tmp_path):
        corpus = two_pair_corpus()
        backend = ScriptedSemanticBackend(default=(0.9, 0.05, 0.05))
        registry = BackendRegistry()
        registry.register_semantic("nli", backend)
        descriptor = ScorerDescriptor(name="nli", kind="nli")
        score_corpus(corpus, descriptor, registry, cache=ScoreCache(tmp_path))
        score_corpus(corpus, descriptor, registry, cache=ScoreCache(tmp_path))
        assert backend.calls == 2

    def test_failures_not_cached(self, tmp_path):
        pair = make_pair()
        corpus = Corpus("tiny", [pair])
        backend = ScriptedSemanticBackend()  # no entries: every call fails
        registry = BackendRegistry()
        registry.register_semantic("nli", backend)
        descriptor = ScorerDescriptor(name="nli", kind="nli")
        cache = ScoreCache(tmp_path)
        records = score_corpus(corpus, descriptor, registry, cache=cache, sleep=lambda _: None)
        assert records[0].failed
        assert cache.get("nli", pair_content_key(pair)) is None

    def test_content_key_depends_on_all_fields(self):
        base = make_pair()
        variants = [
            make_pair(question="different question?"),
            make_pair(reference="different"),
            make_pair(candidate="different text"),
        ]
        keys = {pair_content_key(p) for p in [base] + variants}
        assert len(keys) == 4

    def test_content_key_ignores_identity_fields(self):
        a = make_pair(question_id="q001")
        b = make_pair(question_id="q999", model="model-d")
        assert pair_content_key(a) == pair_content_key(b)


class TestContentKey:
    def test_field_boundaries_matter(self):
        assert content_key("ab", "c") != content_key("a", "bc")

    def test_stable(self):
        assert content_key("x", "y") == content_key("x", "y")
