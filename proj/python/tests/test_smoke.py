import json

import pytest

import advtext


@pytest.fixture(scope="module")
def sentiment_model():
    train, test = advtext.make_sentiment_corpus(120, 40)
    model = advtext.build_word_cnn("reviews", ["Negative", "Positive"], train, length=48)
    model.fit(train, epochs=4, learning_rate=0.1)
    return model, test


def test_tokens_reconstruct_words():
    text = "the  camera is great ."
    for tok in advtext.tokenize(text):
        assert text[tok.begin:tok.end] == tok.word


def test_classify_is_a_distribution(sentiment_model):
    model, test = sentiment_model
    probs = model.classify(test[0].text)
    assert len(probs) == 2
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)


def test_occlusion_spends_tokens_plus_one_calls(sentiment_model):
    model, test = sentiment_model
    doc = test[1]
    table = advtext.deviations(model, doc)
    assert table["calls"] == len(doc.tokens) + 1
    for probe in advtext.gen_probes(doc):
        assert len(probe) == len(doc.text)


def test_apply_then_revert_is_identity():
    doc = advtext.Doc("1", "the screen is terrible .")
    p = advtext.Perturbation(4, "screen", "scr3en", advtext.fingerprint(doc.text))
    edited = advtext.apply(doc, p)
    assert edited.text == "the scr3en is terrible ."
    assert advtext.revert(edited, p).text == doc.text
    assert advtext.edit_distance(doc.text, edited.text) == 1


def test_stale_edit_raises():
    doc = advtext.Doc("1", "abc")
    p = advtext.Perturbation(0, "x", "y", advtext.fingerprint("xbc"))
    with pytest.raises(advtext.InvalidArgument):
        advtext.apply(doc, p)


def test_service_session_roundtrip(sentiment_model):
    model, test = sentiment_model
    lex = advtext.load_lexicons(advtext.default_data_dir())
    svc = advtext.Service(lex)
    svc.add_model(model)
    status, body = svc.handle("GET", "/models")
    assert status == 200
    assert json.loads(body)["models"][0]["id"] == "reviews"

    doc = test[0]
    target = "Positive" if doc.label == "Negative" else "Negative"
    status, body = svc.handle("POST", "/sessions", json.dumps({"model": "reviews", "text": doc.text, "target": target}))
    assert status == 200
    sid = json.loads(body)["id"]
    status, body = svc.handle("POST", f"/sessions/{sid}/suggest", json.dumps({"strategies": "modify,remove"}))
    assert status == 200
    cands = json.loads(body)["candidates"]
    if cands:
        status, _ = svc.handle("POST", f"/sessions/{sid}/apply", json.dumps({"candidate_id": cands[0]["id"]}))
        assert status == 200
        status, _ = svc.handle("POST", f"/sessions/{sid}/undo")
        assert status == 200
    status, body = svc.handle("GET", f"/sessions/{sid}")
    assert json.loads(body)["text"] == doc.text
    status, _ = svc.handle("POST", f"/sessions/{sid}/undo")
    assert status == 409


def test_white_saliency_rejects_unknown_class(sentiment_model):
    model, test = sentiment_model
    with pytest.raises(advtext.InvalidArgument):
        advtext.hot_phrases(model, test[0], "Neutral")
