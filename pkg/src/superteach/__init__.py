"""Super-teaching: pick a subset of an iid sample that teaches a known target better."""
