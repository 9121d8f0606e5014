def count_above(values, threshold):
    count = 0
    for value in values:
        if value > threshold:
            count += 1
    return count
