import random

from batchsched.core import Instance, JobClass


def random_instance(rng: random.Random, max_m=8, max_c=6, max_jobs=6, max_val=30) -> Instance:
    m = rng.randint(1, max_m)
    c = rng.randint(1, max_c)
    classes = []
    for _ in range(c):
        s = rng.randint(1, max_val)
        jobs = tuple(rng.randint(1, max_val) for _ in range(rng.randint(1, max_jobs)))
        classes.append(JobClass(s, jobs))
    return Instance(m=m, classes=tuple(classes))


def tiny_instances(count, seed=4242, max_m=3, max_n=6, max_val=4):
    """Seeded sample of the small-value family used against the exact oracle."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        m = rng.randint(1, max_m)
        n_total = rng.randint(1, max_n)
        c = rng.randint(1, min(3, n_total))
        sizes = [1] * c
        for _ in range(n_total - c):
            sizes[rng.randrange(c)] += 1
        classes = tuple(
            JobClass(rng.randint(1, max_val), tuple(rng.randint(1, max_val) for _ in range(k)))
            for k in sizes
        )
        out.append(Instance(m=m, classes=classes))
    return out
