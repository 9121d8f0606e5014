def summarize(prices):
    discounted = []
    for price in prices:
        discounted.append(price * 0.9)
    expensive = 0
    for price in prices:
        if price > 100:
            expensive += 1
    return discounted, expensive
