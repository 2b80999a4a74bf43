#include <stdlib.h>
#include <stdio.h>

struct node {
	int value;
	struct node *next;
};

struct node *push(struct node *head, int value)
{
	struct node *n = malloc(sizeof(*n));
	if (!n)
		return head;
	n->value = value;
	n->next = head;
	return n;
}

void free_list(struct node *head)
{
	while (head) {
		struct node *next = head->next;
		free(head);
		head = next;
	}
}

int main(void)
{
	struct node *list = NULL;
	for (int i = 0; i < 5; i++)
		list = push(list, i * i);
	for (struct node *it = list; it; it = it->next)
		printf("%d ", it->value);
	putchar('\n');
	free_list(list);
	return 0;
}
