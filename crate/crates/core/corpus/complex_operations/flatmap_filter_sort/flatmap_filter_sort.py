def sorted_positive(matrix):
    positives = []
    for row in matrix:
        for value in row:
            if value > 0:
                positives.append(value)
    positives.sort()
    squares = []
    for value in positives:
        squares.append(value * value)
    return positives, squares
