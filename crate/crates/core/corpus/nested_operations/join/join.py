def join_orders(orders, customers):
    result = []
    for order in orders:
        for customer in customers:
            if order[0] == customer[0]:
                result.append((order[0], (order[1], customer[1])))
    return result
