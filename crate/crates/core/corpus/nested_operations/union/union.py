def merge(first, second):
    merged = []
    for item in first:
        merged.append(item)
    for item in second:
        merged.append(item)
    return merged
