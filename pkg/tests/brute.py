"""Brute-force evaluators of the ring definitions, written independently of
the library: union-find for chains and k-Links, explicit extended-arc edge
lists for symmetry, explicit CCW link walks for nominees."""

from itertools import combinations_with_replacement


def occ(c):
    return 0 if c == 0 else (1 if c == 1 else 2)


class DSU:
    def __init__(self, items):
        self.p = {x: x for x in items}

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        self.p[self.find(a)] = self.find(b)

    def groups(self):
        out = {}
        for x in self.p:
            out.setdefault(self.find(x), set()).add(x)
        return list(out.values())


def chains(counts):
    """Set of (start, length, degenerate) for the occupancy vector."""
    n = len(counts)
    occupied = [v for v in range(n) if counts[v]]
    if len(occupied) == n:
        return {(None, n - 1, True)}
    d = DSU(occupied)
    for v in occupied:
        if counts[(v + 1) % n]:
            d.union(v, (v + 1) % n)
    out = set()
    for g in d.groups():
        start = next(v for v in g if (v - 1) % n not in g)
        out.add((start, len(g) - 1, False))
    return out


def chain_nodes(n, start, length):
    return [(start + j) % n for j in range(length + 1)]


def symmetry(counts, missing):
    """('Neutral', None, None) / ('Symmetric', start, None) / ('Asymmetric', start, dir)."""
    n = len(counts)
    if missing is None:
        return ("Neutral", None, None)
    edge = {missing, (missing + 1) % n}
    for start, length, degen in chains(counts):
        if degen:
            continue
        nodes = chain_nodes(n, start, length)
        ext = [(start - 1) % n] + nodes + [(nodes[-1] + 1) % n]
        for t in range(len(ext) - 1):
            if {ext[t], ext[t + 1]} == edge:
                before, after = t, len(ext) - 2 - t
                if before == after:
                    return ("Symmetric", start, None)
                return ("Asymmetric", start, 1 if before < after else -1)
    return ("Neutral", None, None)


def directed_chains(counts):
    n = len(counts)
    out = []
    for start, length, degen in chains(counts):
        if degen or length == 0:
            continue
        nodes = chain_nodes(n, start, length)
        a, b = occ(counts[nodes[0]]), occ(counts[nodes[-1]])
        if (a, b) == (1, 2):
            out.append(1)
        elif (a, b) == (2, 1):
            out.append(-1)
    return out


def global_dir(counts):
    d = directed_chains(counts)
    cw, ccw = d.count(1), d.count(-1)
    if cw == ccw:
        return None
    return 1 if cw > ccw else -1


def klinks(n, nodes, k):
    """List of links, each a CW-ordered tuple of nodes."""
    nodes = sorted(nodes)
    d = DSU(nodes)
    succ = {v: nodes[(i + 1) % len(nodes)] for i, v in enumerate(nodes)}
    for v in nodes:
        gap = (succ[v] - v) % n or n
        if gap < k:
            d.union(v, succ[v])
    pred = {s: v for v, s in succ.items()}
    out = []
    for g in d.groups():
        tails = [v for v in g if pred[v] not in g or ((v - pred[v]) % n or n) >= k]
        tail = tails[0] if tails else min(g)
        run = [tail]
        while len(run) < len(g):
            run.append(succ[run[-1]])
        out.append(tuple(run))
    return out


def movable(n, nodes, k, link):
    nodes = sorted(nodes)
    head = link[-1]
    later = [v for v in nodes if v != head]
    gap = min(((v - head) % n for v in later), default=n) or n
    return gap > k


def nominees(n, nodes, k, link):
    links = klinks(n, nodes, k)
    everyone = set(nodes)
    if len(link) >= 2:
        return {link[-1]}, everyone - {link[-1]}
    owner = {v: ln for ln in links for v in ln}
    nodes_sorted = sorted(nodes)

    def ccw_prev(ln):
        i = nodes_sorted.index(ln[0])
        return owner[nodes_sorted[i - 1]]

    walk = [link]
    while len(walk) < len(links):
        walk.append(ccw_prev(walk[-1]))
    x = next((j for j in range(1, len(walk)) if len(walk[j]) >= 2), None)
    if x is None:
        return {link[-1]}, everyone - {link[-1]}
    mov = [j for j in range(1, x + 1) if movable(n, nodes, k, walk[j])]
    if not mov:
        cw = {walk[j][-1] for j in range(x + 1)}
        return cw, everyone - cw
    z = max(mov)
    cw = {walk[j][-1] for j in range(z)}
    return cw, everyone - {walk[j][-1] for j in range(z, x + 1)}


def elected(n, nodes, k):
    out = set()
    for ln in klinks(n, nodes, k):
        if movable(n, nodes, k, ln):
            out |= nominees(n, nodes, k, ln)[0]
    return out


def occupancy_patterns(n, max_agents):
    """Every count vector on n nodes with 1..max_agents agents."""
    for l in range(1, max_agents + 1):
        for combo in combinations_with_replacement(range(n), l):
            counts = [0] * n
            for v in combo:
                counts[v] += 1
            yield tuple(counts)
