# Copyright 2026 The Explore Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================

"""Regenerates the sample data in this directory (python3 generate.py)."""
import random

rng = random.Random(2022)
genres = ["pop", "rock", "jazz", "electronic"]
base = {  # danceability, energy, instrumentalness, liveness, minutes
    "pop": (0.75, 0.7, 0.05, 0.15, 3.4),
    "rock": (0.5, 0.85, 0.1, 0.3, 4.2),
    "jazz": (0.45, 0.35, 0.6, 0.25, 5.5),
    "electronic": (0.8, 0.8, 0.7, 0.1, 5.0),
}


def jitter(v, lo, hi, spread):
    return round(min(hi, max(lo, v + rng.uniform(-spread, spread))), 3)


def song_row(sid, title, artist, genre):
    d, e, i, l, m = base[genre]
    return [sid, title, artist, genre, jitter(d, 0, 1, 0.15), jitter(e, 0, 1, 0.15), jitter(i, 0, 1, 0.15),
            jitter(l, 0, 1, 0.1), jitter(m, 1.5, 9, 1.0)]


header = "song_id,title,artist,genre,danceability,energy,instrumentalness,liveness,duration_minutes"
songs = []
for n in range(40):
    g = genres[n % 4]
    songs.append(song_row(f"song{n:02d}", f"Track {n:02d}", f"Artist {n % 9}", g))
with open("catalog.csv", "w") as f:
    f.write(header + "\n")
    for r in songs:
        f.write(",".join(str(x) for x in r) + "\n")

for name, count, prefix in (("playlist_2022.csv", 12, "b22_"), ("playlist_all_time.csv", 10, "bat_")):
    with open(name, "w") as f:
        f.write(header + "\n")
        for n in range(count):
            g = genres[rng.randrange(4)]
            row = song_row(f"{prefix}{n:02d}", f"Hit {n:02d}", f"Star {n % 5}", g)
            f.write(",".join(str(x) for x in row) + "\n")

# Three taste clusters; each user mostly plays two favoured genres.
clusters = [("pop", "electronic"), ("rock", "pop"), ("jazz", "electronic")]
start = 1546300800  # 2019-01-01 UTC
span = 3 * 365 * 86400
events = []
for u in range(30):
    fav = clusters[u % 3]
    liked = [s for s in songs if s[3] in fav]
    other = [s for s in songs if s[3] not in fav]
    picks = rng.sample(liked, 9) + rng.sample(other, 3)
    for k, s in enumerate(picks):
        plays = rng.randint(4, 14) if s[3] in fav else rng.randint(1, 3)
        plays += 3 if k < 3 else 0
        for _ in range(plays):
            events.append((f"user{u:02d}", start + rng.randrange(span), s[0]))
events.sort()
with open("events.tsv", "w") as f:
    f.write("# user_id\ttimestamp\tsong_id\n")
    for u, t, s in events:
        f.write(f"{u}\t{t}\t{s}\n")

with open("seeds.csv", "w") as f:
    f.write(header + ",in_corpus_song_id\n")
    f.write("ext1,Outside One,Someone,jazz,0.4,0.3,0.7,0.2,6.1,\n")
    f.write("ext2,Outside Two,Someone,jazz,0.5,0.4,0.5,0.2,4.9,\n")
    f.write("ext3,Outside Three,Other,electronic,0.8,0.8,0.6,0.1,5.2,\n")
    f.write(",".join(str(x) for x in songs[2]) + ",song02\n")
    f.write("ext5,Outside Five,Other,,0.6,0.6,0.1,0.3,3.3,\n")
