"""Regenerates tests/data/golden/mine_bundled.json: TF-IDF model dump of the
bundled inquiry corpus, computed with NLTK's original-algorithm Porter stemmer
(iterated to a fixpoint) and the shipped stopword list.

Usage: python3 tests/oracles/mine_golden.py > tests/data/golden/mine_bundled.json
"""
import csv
import json
import math
import os
import re

from nltk.stem.porter import PorterStemmer

ROOT = os.path.join(os.path.dirname(__file__), "..", "..")
porter = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


def stem(word):
    while True:
        nxt = porter.stem(word)
        if nxt == word:
            return word
        word = nxt


with open(os.path.join(ROOT, "data", "stopwords.txt")) as f:
    stop = {w.strip() for w in f if w.strip() and not w.startswith("#")}

docs = []
with open(os.path.join(ROOT, "data", "inquiries.csv"), newline="") as f:
    for row in csv.DictReader(f):
        text = " ".join(row["key_phrases"].split(";"))
        tokens = [t for t in re.split(r"[^a-z0-9]+", text.lower()) if t]
        docs.append((int(row["year"]), [stem(t) for t in tokens if t not in stop]))

vocab = sorted({t for _, toks in docs for t in toks})
n = len(docs)
df = {t: sum(1 for _, toks in docs if t in toks) for t in vocab}
weights = []
for year, toks in docs:
    for t in vocab:
        c = toks.count(t)
        if c:
            weights.append({"year": year, "term": t, "weight": round(c / len(toks) * math.log(n / df[t]), 6)})

print(json.dumps({"n_docs": n, "doc_freq": df, "weights": weights}, indent=2))
