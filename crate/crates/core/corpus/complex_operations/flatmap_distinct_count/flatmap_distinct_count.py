def vocabulary_stats(documents):
    distinct_words = 0
    seen = []
    for doc in documents:
        for word in doc.split():
            if word not in seen:
                seen.append(word)
                distinct_words += 1
    total_chars = 0
    for doc in documents:
        total_chars += len(doc)
    return distinct_words, total_chars
