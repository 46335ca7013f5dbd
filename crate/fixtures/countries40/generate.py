"""Regenerates the synthetic 40-country network in this directory.

Country nodes are embedded in a larger graph of article nodes. A handful of
"relations" articles connect country pairs that have no direct link, so the
hidden-link component has something to find.
"""
import random
from pathlib import Path

GROUPS = {
    "OC": ["US", "GB", "CA", "AU", "NZ", "IE"],
    "BC": ["RU", "UA"],
    "RC": ["FR", "DE", "IT", "ES", "NL", "SE", "NO", "DK", "FI", "PL", "GR", "CH"],
    "GC": ["BR", "MX", "AR", "CL", "CO"],
    "YC": ["TR", "IR", "IQ", "IL", "EG", "SA"],
    "PUC": ["JP", "CN", "KR", "TW"],
    "PIC": ["IN", "PK", "ID", "PH", "TH"],
}
HIDDEN = [("CA", "US"), ("UA", "RU"), ("TW", "CN"), ("PK", "IN"), ("IT", "FR"), ("ES", "FR")]
CHATTY = {"UA", "TW", "IR", "AR", "NO"}
ARTICLES = 360

rng = random.Random(2017)
group_of = {c: g for g, cs in GROUPS.items() for c in cs}
countries = sorted(group_of, key=lambda c: ["US", "FR", "DE", "GB", "CN", "JP", "IN", "RU"].index(c)
                   if c in ["US", "FR", "DE", "GB", "CN", "JP", "IN", "RU"] else 100 + rng.random())
weight = {c: 1.0 / (i + 3) ** 0.8 for i, c in enumerate(countries)}
articles = [f"article_{i:03d}" for i in range(ARTICLES)]
home = {a: rng.choices(countries, [weight[c] for c in countries])[0] for a in articles}
hidden_pairs = {frozenset(p) for p in HIDDEN}

edges = set()

def link(s, t):
    if s != t:
        edges.add((s, t))

for a in articles:
    if rng.random() < 0.08:
        continue
    link(a, home[a])
    if rng.random() < 0.3:
        link(a, rng.choices(countries, [weight[c] for c in countries])[0])
    same = [b for b in articles if group_of[home[b]] == group_of[home[a]]]
    for _ in range(rng.randint(2, 5)):
        link(a, rng.choice(same if rng.random() < 0.7 else articles))

for c in countries:
    own = [a for a in articles if home[a] == c]
    for a in rng.sample(own, min(len(own), 12 if c in CHATTY else 4)):
        link(c, a)
    if c in CHATTY:
        for a in rng.sample(articles, 25):
            link(c, a)
    peers = [d for d in GROUPS[group_of[c]] if d != c]
    for d in rng.sample(peers, min(len(peers), 3)) + rng.sample(countries[:6], 2):
        if frozenset((c, d)) not in hidden_pairs:
            link(c, d)

for i, (a, b) in enumerate(HIDDEN):
    rel = f"relations_{a}_{b}"
    articles.append(rel)
    for _ in range(3):
        link(rel, a)
        link(rel, b)
    link(a, rel)
    link(b, rel)
    for x in rng.sample(articles[:ARTICLES], 4):
        link(x, rel)

nodes = countries + articles
here = Path(__file__).parent
(here / "labels.tsv").write_text("".join(f"{i}\t{n}\n" for i, n in enumerate(nodes)))
(here / "edges.tsv").write_text(
    "# source\ttarget\n" + "".join(f"{s}\t{t}\n" for s, t in sorted(edges, key=lambda e: (nodes.index(e[0]), nodes.index(e[1]))))
)
(here / "subset.txt").write_text("".join(f"{c}\n" for c in countries))
(here / "groups.tsv").write_text("".join(f"{c}\t{group_of[c]}\n" for c in countries))
