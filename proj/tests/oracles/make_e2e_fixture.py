"""Writes the end-to-end pipeline fixtures: web records, gold labels and the
mock annotator script."""
import json
import pathlib
import random

rng = random.Random(20240)
LANGS = ["eng", "deu", "spa", "vie"]
DATASETS = {
    "eng": ["HateXplain", "Sexism", "Covid", "US_election", "HateEval-eng", "AbusEval", "AHSD"],
    "deu": ["GermEval21", "GermEval19", "GermEval18", "HASOC", "Gahd"],
    "spa": ["Haternet", "HateEval-spa", "Chileno"],
    "vie": ["ViHSD"],
}
MODELS = ["gemma", "llama", "mistral", "qwen"]
KEYWORD_PATHS = ["/forum/t/{}", "/thread/{}", "/reply/{}", "/posts/{}", "/status-update/{}", "/quote/{}"]

out = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "e2e"
records, labels = [], []
by_comment = {m: {} for m in MODELS}
for i in range(96):
    rid = f"w{i:03d}"
    lang = LANGS[i % 4]
    hate = rng.random() < 0.35
    text = f"{lang} comment {i} {'you people are vermin' if hate else 'nice weather today'}"
    if i % 9 == 4:
        url = f"https://news.example/article/{i}"
    else:
        url = f"https://board.example" + KEYWORD_PATHS[i % 6].format(i)
    schema = ["https://schema.org/Recipe"] if i % 13 == 7 else [f"{'https' if i % 2 else 'http'}://schema.org/Comment"]
    records.append({"id": rid, "url": url, "lang": lang, "schema_types": schema, "text": text})
    ds = DATASETS[lang][i % len(DATASETS[lang])]
    labels.append({"id": rid, "dataset": ds, "text": text, "gold": "Hate" if hate else "Neutral"})
    for m in MODELS:
        if i % 17 == 3 and m == "mistral":
            continue  # falls back to the model default
        p = rng.uniform(0.55, 0.97) if hate else rng.uniform(0.02, 0.45)
        if rng.random() < 0.12:
            p = 1.0 - p
        mass = rng.uniform(0.6, 0.95)
        w = {"1": round(p * mass, 4), "2": round((1 - p) * mass, 4), "the": round(1 - mass, 4)}
        by_comment[m][text] = w

fixture = {"models": {m: {"default": {"1": 0.2, "2": 0.7, "I": 0.1}, "by_comment": by_comment[m]} for m in MODELS}}

with open(out / "web.jsonl", "w") as f:
    for r in records:
        f.write(json.dumps(r, sort_keys=True) + "\n")
with open(out / "labels.jsonl", "w") as f:
    for r in labels:
        f.write(json.dumps(r, sort_keys=True) + "\n")
with open(out / "mock_fixture.json", "w") as f:
    json.dump(fixture, f, indent=1, sort_keys=True)
    f.write("\n")
