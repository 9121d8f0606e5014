def count_all(first, second):
    combined = []
    for x in first:
        combined.append(x)
    for y in second:
        combined.append(y)
    return len(combined)
