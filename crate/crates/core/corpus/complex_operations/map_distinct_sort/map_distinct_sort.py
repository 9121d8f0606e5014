def normalize_tags(tags):
    cleaned = []
    for tag in tags:
        t = tag.strip().lower()
        if t:
            cleaned.append(t)
    unique = []
    for tag in cleaned:
        if tag not in unique:
            unique.append(tag)
    unique.sort()
    lengths = []
    for tag in unique:
        lengths.append(len(tag))
    return unique, lengths
