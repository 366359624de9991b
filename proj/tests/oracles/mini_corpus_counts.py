"""Independent recount of the mini corpus fixture.

Reads fixtures/mini_corpus.jsonl and fixtures/domains.csv with the Python
standard library (plus publicsuffixlist for domain reduction) and writes
fixtures/mini_expected.json and fixtures/mini_domain_ae.csv.
"""
import csv
import json
import os
from collections import defaultdict
from datetime import datetime, timezone
from urllib.parse import urlsplit

from publicsuffixlist import PublicSuffixList

here = os.path.dirname(os.path.abspath(__file__))
fx = os.path.join(here, "..", "fixtures")
cutoff = datetime(2022, 12, 15, tzinfo=timezone.utc)

with open(os.path.join(fx, "mini_corpus.jsonl")) as f:
    lines = [ln for ln in f.read().split("\n") if ln.strip()]
records = [json.loads(ln) for ln in lines]


def ts(s):
    return datetime.strptime(s, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


pre = [r for r in records if ts(r["created_at"]) < cutoff]
post = [r for r in records if ts(r["created_at"]) >= cutoff]
non_en = [r for r in post if r["lang"] != "en"]
kept = [r for r in post if r["lang"] == "en"]
originals = [r for r in kept if r["kind"] == "original"]

# retweet network over the filtered corpus
weight = defaultdict(int)
nodes = set()
for r in kept:
    if r["kind"] != "retweet":
        continue
    a, b = r["author_id"], r["retweeted_author_id"]
    nodes.update([a, b])
    weight[(a, b)] += 1
retweeters = defaultdict(set)
for (a, b) in weight:
    if a != b:
        retweeters[b].add(a)
ranking = sorted(nodes, key=lambda n: (-len(retweeters[n]), n))

with open(os.path.join(fx, "mini_seeds.txt")) as f:
    seeds = [s.strip() for s in f if s.strip()]
hubs = [n for n in ranking if n in seeds and len(retweeters[n]) >= 5]

# interaction matrix: users retweeting >= 2 distinct selected influencers
hub_set = set(hubs)
rows = {}
for (a, b), w in weight.items():
    if b in hub_set and a != b:
        rows.setdefault(a, {})[b] = w
rows = {u: d for u, d in rows.items() if len(d) >= 2}
cols = {b for d in rows.values() for b in d}

# pooled per-domain AE over filtered originals, full attribution
psl = PublicSuffixList()
table = {}
with open(os.path.join(fx, "domains.csv")) as f:
    for row in csv.DictReader(f):
        table[row["domain"]] = row
acc = defaultdict(lambda: [0, 0, 0, 0, 0])
for r in originals:
    matched = set()
    for u in r["urls"]:
        host = urlsplit(u).hostname
        if not host:
            continue
        d = psl.privatesuffix(host.lower())
        if d in table:
            matched.add(d)
    for d in matched:
        a = acc[d]
        a[0] += r["impressions"]
        a[1] += r["retweets"]
        a[2] += r["replies"]
        a[3] += r["likes"]
        a[4] += r["quotes"]

with open(os.path.join(fx, "mini_domain_ae.csv"), "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["domain", "impressions", "retweet", "reply", "like", "quote"])
    for d in sorted(acc):
        imp = acc[d][0]
        if imp == 0:
            continue
        w.writerow([d, imp] + [repr(c / imp) for c in acc[d][1:]])

expected = {
    "records": len(records),
    "pre_cutoff": len(pre),
    "non_english": len(non_en),
    "retained": len(kept),
    "originals": len(originals),
    "retweets": sum(1 for r in kept if r["kind"] == "retweet"),
    "self_retweets": sum(1 for r in kept if r["kind"] == "retweet" and r["author_id"] == r["retweeted_author_id"]),
    "graph_nodes": len(nodes),
    "graph_edges": len(weight),
    "top_ranked": ranking[0],
    "top_unique_in_degree": len(retweeters[ranking[0]]),
    "hubs_threshold_5": hubs,
    "matrix_rows": len(rows),
    "matrix_cols": len(cols),
    "domains_with_ae": sum(1 for d in acc if acc[d][0] > 0),
}
with open(os.path.join(fx, "mini_expected.json"), "w") as f:
    json.dump(expected, f, indent=2)
    f.write("\n")
print(json.dumps(expected, indent=2))
