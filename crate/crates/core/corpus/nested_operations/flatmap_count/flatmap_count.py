def count_words(sentences):
    count = 0
    for sentence in sentences:
        for word in sentence.split():
            count += 1
    return count
