from dkdring.ring import GlobalConfiguration


def cfg_from_counts(counts, missing=None):
    """Configuration with ids 1.. assigned node by node."""
    where, a = {}, 1
    for v, c in enumerate(counts):
        for _ in range(c):
            where[a] = v
            a += 1
    return GlobalConfiguration.from_mapping(len(counts), where, missing)


def cfg_at(n, nodes, missing=None):
    return GlobalConfiguration.from_mapping(n, {i + 1: v for i, v in enumerate(nodes)}, missing)
