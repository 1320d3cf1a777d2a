#!/usr/bin/env python3
"""Generate the bundled synthetic sample in the FibVID column layout.

Two planted topics (health and politics), power-law follower counts and
retweet counts that depend on author reach, topical fit and writing style.

    python3 tools/make_sample.py data/sample
"""

import argparse
import csv
import json
import math
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

TOPICS = {
    "covid": [
        "vaccine", "virus", "mask", "lockdown", "hospital", "doctors", "pandemic", "covid",
        "infection", "cases", "quarantine", "symptoms", "immunity", "nurses", "testing", "outbreak",
    ],
    "non_covid": [
        "election", "ballot", "vote", "senator", "congress", "fraud", "campaign", "president",
        "voters", "governor", "policy", "debate", "taxes", "border", "court", "parliament",
    ],
}
BACKGROUND = ["new", "report", "today", "news", "says", "people", "week", "claim", "video", "breaking", "share", "read"]
POSITIVE = ["good", "great", "safe", "happy", "best", "wonderful"]
NEGATIVE = ["bad", "terrible", "dangerous", "awful", "sad", "worst"]
PERSONAL = ["i think", "we must", "you should", "they say", "my friends", "our families"]
IMPERSONAL = ["it is", "this is", "that was", "these are"]
LONG_WORDS = ["unbelievable", "investigation", "administration", "international", "unprecedented", "responsibility"]

START = datetime(2020, 3, 1, tzinfo=timezone.utc)


def iso(dt):
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def make_text(rng, topic, personal, sentiment):
    words = rng.sample(TOPICS[topic], 5) + rng.sample(BACKGROUND, 2)
    if rng.random() < 0.3:
        words += rng.sample(LONG_WORDS, 2)
    if sentiment > 0:
        words.append(rng.choice(POSITIVE))
    elif sentiment < 0:
        words.append(rng.choice(NEGATIVE))
    rng.shuffle(words)
    head = rng.choice(PERSONAL) if personal else rng.choice(IMPERSONAL)
    text = head + " " + " ".join(words[:4]) + ". " + " ".join(words[4:]) + "."
    if rng.random() < 0.4:
        text += " https://example.org/n/" + str(rng.randrange(10**6))
    if rng.random() < 0.3:
        text += " #" + rng.choice(TOPICS[topic])
    return text[0].upper() + text[1:]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--claims", type=int, default=40)
    ap.add_argument("--users", type=int, default=120)
    ap.add_argument("--tweets", type=int, default=360)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)

    claims = []
    for i in range(args.claims):
        topic = "covid" if i % 2 == 0 else "non_covid"
        label = rng.randrange(2)
        words = rng.sample(TOPICS[topic], 4)
        claims.append({"news_id": f"n{i:03d}", "claim": "Claim that " + " ".join(words) + ".",
                       "label": label, "topic": topic})

    users = []
    for i in range(args.users):
        followers = min(int(20 * rng.paretovariate(1.1)) - 20 + rng.randrange(5), 2_000_000)
        friends = int(50 * rng.paretovariate(1.5)) - 50 + rng.randrange(20)
        favourite = "covid" if rng.random() < 0.5 else "non_covid"
        users.append({
            "user_id": f"u{i:03d}",
            "description": "Interested in " + " ".join(rng.sample(TOPICS[favourite], 2)),
            "followers_count": followers,
            "friends_count": friends,
            "created_at": iso(START - timedelta(days=rng.randrange(200, 4000))),
            "_topic": favourite,
        })

    tweets = []
    for i in range(args.tweets):
        claim = rng.choice(claims)
        topic = claim["topic"]
        # authors mostly post on their favourite topic
        pool = [u for u in users if (u["_topic"] == topic) == (rng.random() < 0.85)]
        author = rng.choice(pool)
        personal = rng.random() < 0.5
        sentiment = rng.choice([-1, 0, 1])
        reach = math.log1p(author["followers_count"])
        fake = claim["label"] == 1
        lam = math.exp(-0.4 + 0.55 * reach + 0.9 * personal + 0.5 * (sentiment != 0) + 0.3 * fake)
        retweets = int(lam * rng.gammavariate(4.0, 0.25))
        likes = int(retweets * rng.uniform(0.5, 3.0)) + rng.randrange(3)
        tweets.append({
            "tweet_id": str(10**15 + i),
            "news_id": claim["news_id"],
            "user_id": author["user_id"],
            "text": make_text(rng, topic, personal, sentiment),
            "retweet_count": retweets,
            "like_count": likes,
            "hashtags": "",
            "created_at": iso(START + timedelta(minutes=rng.randrange(60 * 24 * 200))),
        })

    tweets.sort(key=lambda t: t["created_at"])
    for t in tweets:
        tags = [w[1:] for w in t["text"].split() if w.startswith("#")]
        t["hashtags"] = ";".join(tags)

    ids = [u["user_id"] for u in users]
    weights = [1 + u["followers_count"] ** 0.5 for u in users]
    edges = set()
    for follower in ids:
        for followee in rng.choices(ids, weights=weights, k=rng.randrange(2, 12)):
            if followee != follower:
                edges.add((follower, followee))

    def write(name, rows, fields):
        with open(out / name, "w", newline="", encoding="utf-8") as f:
            w = csv.DictWriter(f, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
            w.writeheader()
            w.writerows(rows)

    write("claims.csv", claims, ["news_id", "claim", "label", "topic"])
    write("users.csv", users, ["user_id", "description", "followers_count", "friends_count", "created_at"])
    write("propagation.csv", tweets,
          ["tweet_id", "news_id", "user_id", "text", "retweet_count", "like_count", "hashtags", "created_at"])
    with open(out / "follows.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["follower_id", "followee_id"])
        w.writerows(sorted(edges))

    config = {
        "seed": 42,
        "out_dir": "../../out/sample",
        "inputs": {"claims": "claims.csv", "propagation": "propagation.csv", "users": "users.csv",
                   "follows": "follows.csv"},
        "topics": {"num_topics": 2, "sweeps": 150, "min_count": 2},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
